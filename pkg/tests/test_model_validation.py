import random

import pytest

from spanalign.model import SOURCE, TARGET, Span, SpanLabel, SpanLink, WordLink
from spanalign.validation import (
    DUPLICATE_LINK_ID,
    LABEL_SIDES_MISMATCH,
    OVERLAPPING_SPANS,
    SPAN_OUT_OF_RANGE,
    WORD_LINK_CROSSES_SPANS,
    WORD_LINK_OUTSIDE_SPAN,
    WORD_LINK_PARENT_ONE_SIDED,
    WORD_LINK_UNKNOWN_PARENT,
    validate_document,
)
from conftest import make_doc, random_complete_document


def link(id, src=None, tgt=None, label=SpanLabel.TRAN):
    return SpanLink(
        id,
        Span(SOURCE, *src) if src else None,
        Span(TARGET, *tgt) if tgt else None,
        label,
    )


def test_fully_covered_doc_is_clean_and_complete():
    doc = make_doc(
        4,
        4,
        [link("a", (0, 2), (0, 3)), link("b", (2, 4), (3, 4), SpanLabel.PARA)],
        [WordLink(0, 0, "sure", "a"), WordLink(3, 3, "possible", "b")],
    )
    report = validate_document(doc)
    assert report.ok
    assert report.is_complete


def test_partial_coverage_is_not_an_error():
    doc = make_doc(4, 4, [link("a", (0, 2), (0, 3))])
    report = validate_document(doc)
    assert report.ok
    assert not report.is_complete


def test_overlapping_spans_reported():
    doc = make_doc(6, 6, [link("a", (0, 3), (0, 3)), link("b", (2, 5), (3, 6), SpanLabel.SUM)])
    report = validate_document(doc)
    assert OVERLAPPING_SPANS in report.codes()
    assert not report.is_complete


def test_word_link_crossing_span_links():
    doc = make_doc(
        6,
        6,
        [link("a", (0, 3), (0, 3)), link("b", (3, 6), (3, 6), SpanLabel.PARA)],
        [WordLink(1, 4, "sure", "a")],  # source token in a, target token in b
    )
    report = validate_document(doc)
    assert WORD_LINK_CROSSES_SPANS in report.codes()


def test_word_link_outside_any_span():
    doc = make_doc(6, 6, [link("a", (0, 3), (0, 3))], [WordLink(1, 4, "sure", "a")])
    report = validate_document(doc)
    assert WORD_LINK_OUTSIDE_SPAN in report.codes()


def test_word_link_unknown_parent():
    doc = make_doc(4, 4, [link("a", (0, 4), (0, 4))], [WordLink(0, 0, "sure", "ghost")])
    assert WORD_LINK_UNKNOWN_PARENT in validate_document(doc).codes()


def test_word_link_on_one_sided_parent():
    doc = make_doc(
        4,
        4,
        [link("a", (0, 4), None, SpanLabel.ADDF), link("b", None, (0, 4), SpanLabel.ADDU)],
        [WordLink(0, 0, "sure", "a")],
    )
    assert WORD_LINK_PARENT_ONE_SIDED in validate_document(doc).codes()


def test_label_sides_mismatch_both_ways():
    doc = make_doc(
        4,
        4,
        [link("a", (0, 4), (0, 4), SpanLabel.ADDU), link("b", (0, 2), None, SpanLabel.TRAN)],
    )
    report = validate_document(doc)
    mismatches = [e for e in report.errors if e.code == LABEL_SIDES_MISMATCH]
    assert {e.ids[0] for e in mismatches} == {"a", "b"}


def test_span_out_of_range():
    doc = make_doc(3, 3, [link("a", (0, 5), (0, 3))])
    assert SPAN_OUT_OF_RANGE in validate_document(doc).codes()


def test_duplicate_link_id():
    doc = make_doc(4, 4, [link("a", (0, 2), (0, 2)), link("a", (2, 4), (2, 4))])
    assert DUPLICATE_LINK_ID in validate_document(doc).codes()


def test_validation_pure_and_deterministic():
    doc = make_doc(6, 6, [link("a", (0, 3), (0, 3)), link("b", (2, 5), (3, 6), SpanLabel.SUM)])
    first = validate_document(doc)
    second = validate_document(doc)
    assert first == second


def test_complete_partition_sums_to_token_count():
    rng = random.Random(7)
    for _ in range(25):
        doc = random_complete_document(rng)
        report = validate_document(doc)
        assert report.ok and report.is_complete
        for side, n in ((SOURCE, len(doc.source)), (TARGET, len(doc.target))):
            assert sum(len(s) for s in doc.side_spans(side)) == n


def test_empty_document_not_complete():
    doc = make_doc(3, 3, [])
    report = validate_document(doc)
    assert report.ok
    assert not report.is_complete


def test_span_constructor_rejects_bad_ranges():
    with pytest.raises(ValueError):
        Span(SOURCE, 2, 2)
    with pytest.raises(ValueError):
        Span(SOURCE, -1, 2)
