import math
import random

import pytest

from spanalign.analysis import (
    AnalysisError,
    comparative_reports,
    span_length_distribution,
    span_length_samples,
    token_label_distribution,
    weighted_length_ratio,
)
from spanalign.model import (
    SOURCE,
    TARGET,
    AlignmentDocument,
    DocumentMeta,
    Span,
    SpanLabel,
    SpanLink,
)
from conftest import make_doc, make_side, random_complete_document


def two_sided(id, src, tgt, label=SpanLabel.TRAN):
    return SpanLink(id, Span(SOURCE, *src), Span(TARGET, *tgt), label)


def test_single_label_is_100_percent():
    doc = make_doc(5, 4, [two_sided("a", (0, 5), (0, 4))])
    dist = token_label_distribution([doc])
    assert dist.source == {"TRAN": 100.0}
    assert dist.target == {"TRAN": 100.0}


def test_one_sided_addition_counts_on_one_side_only():
    doc = make_doc(
        5,
        4,
        [two_sided("a", (0, 3), (0, 4)), SpanLink("b", Span(SOURCE, 3, 5), None, SpanLabel.ADDF)],
    )
    dist = token_label_distribution([doc])
    assert dist.source["ADDF"] == pytest.approx(40.0)
    assert "ADDF" not in dist.target


def test_percentages_sum_to_100():
    rng = random.Random(21)
    docs = [random_complete_document(rng) for _ in range(10)]
    dist = token_label_distribution(docs)
    assert sum(dist.source.values()) == pytest.approx(100.0, abs=0.01)
    assert sum(dist.target.values()) == pytest.approx(100.0, abs=0.01)


def test_incomplete_document_errors():
    doc = make_doc(5, 4, [two_sided("a", (0, 3), (0, 4))])
    with pytest.raises(AnalysisError):
        token_label_distribution([doc])


def test_weighted_ratio_single_link():
    doc = make_doc(4, 2, [two_sided("a", (0, 4), (0, 2), SpanLabel.SUM)])
    assert weighted_length_ratio([doc]) == {"SUM": 0.5}


def test_weighted_ratio_is_sum_over_sum():
    doc = make_doc(
        5,
        3,
        [two_sided("a", (0, 4), (0, 2), SpanLabel.SUM), two_sided("b", (4, 5), (2, 3), SpanLabel.SUM)],
    )
    assert weighted_length_ratio([doc]) == {"SUM": pytest.approx(0.6)}


def test_weighted_ratio_matches_per_link_weighted_mean():
    rng = random.Random(22)
    docs = [random_complete_document(rng) for _ in range(8)]
    ratios = weighted_length_ratio(docs)
    # brute-force weighted mean of per-link ratios, weights = source lengths
    weights: dict[str, float] = {}
    acc: dict[str, float] = {}
    for doc in docs:
        for link in doc.span_links:
            if link.is_one_sided:
                continue
            label = link.label.value
            weights[label] = weights.get(label, 0) + len(link.src)
            acc[label] = acc.get(label, 0) + len(link.src) * (len(link.tgt) / len(link.src))
    for label, ratio in ratios.items():
        assert math.isclose(ratio, acc[label] / weights[label], abs_tol=1e-12)


def test_additions_excluded_from_ratio():
    doc = make_doc(
        5,
        4,
        [two_sided("a", (0, 3), (0, 4)), SpanLink("b", Span(SOURCE, 3, 5), None, SpanLabel.ADDF)],
    )
    assert "ADDF" not in weighted_length_ratio([doc])


def test_span_length_distribution_constant():
    doc = make_doc(6, 6, [two_sided("a", (0, 3), (0, 3)), two_sided("b", (3, 6), (3, 6))])
    summary = span_length_distribution([doc], "label")["TRAN"]
    assert summary.mean == 3.0
    assert summary.q3 - summary.q1 == 0.0


def test_group_by_annotator_requires_metadata():
    doc = make_doc(4, 4, [two_sided("a", (0, 4), (0, 4))])
    with pytest.raises(AnalysisError):
        span_length_distribution([doc], "annotator")
    with pytest.raises(AnalysisError):
        span_length_distribution([doc], "nonsense")


def test_group_by_annotator():
    rng = random.Random(23)
    docs = [random_complete_document(rng) for _ in range(6)]
    groups = span_length_distribution(docs, "annotator")
    assert all(key.startswith("a") for key in groups)


def test_comparative_direct_vs_relay():
    def doc_with_ratio(pair_id, n_src, n_tgt, relay):
        side_s = make_side([["x" * 10] * n_src], SOURCE, doc_id=f"{pair_id}-s")
        side_t = make_side([["x" * 10] * n_tgt], TARGET, doc_id=f"{pair_id}-t")
        return AlignmentDocument(
            pair_id=pair_id,
            source=side_s,
            target=side_t,
            span_links=(SpanLink("a", Span(SOURCE, 0, n_src), Span(TARGET, 0, n_tgt), SpanLabel.TRAN),),
            meta=DocumentMeta(relay=relay),
        )

    direct = doc_with_ratio("d", 4, 2, relay=False)
    relay = doc_with_ratio("r", 4, 4, relay=True)
    report = comparative_reports([direct, relay])
    # 2 tokens of 10 chars + 1 space = 21; source 4 tokens = 43
    assert report.direct_char_ratio == pytest.approx(21 / 43)
    assert report.relay_char_ratio == pytest.approx(1.0)
    assert report.label_share_by_relay[False]["TRAN"] == 100.0


def test_multi_track_pairs():
    shared_source = make_side([["slovo"] * 6], SOURCE, doc_id="S1")

    def interp(doc_id, n_tokens):
        side_t = make_side([["abcd"] * n_tokens], TARGET, doc_id=doc_id, lang="en")
        return AlignmentDocument(
            pair_id=f"p-{doc_id}",
            source=shared_source,
            target=side_t,
            span_links=(SpanLink("a", Span(SOURCE, 0, 6), Span(TARGET, 0, n_tokens), SpanLabel.TRAN),),
        )

    a = interp("T1", 5)
    b = interp("T2", 4)
    report = comparative_reports([a, b])
    assert len(report.multi_track) == 1
    row = report.multi_track[0]
    assert (row.first_doc_id, row.second_doc_id) == ("T1", "T2")
    assert row.token_ratio == pytest.approx(5 / 4)
    char_a = 5 * 4 + 4
    char_b = 4 * 4 + 3
    assert row.char_ratio == pytest.approx(char_a / char_b)


def test_reports_invariant_to_document_order():
    rng = random.Random(29)
    docs = [random_complete_document(rng, pair_id=f"p{i}") for i in range(6)]
    fwd = token_label_distribution(docs)
    rev = token_label_distribution(list(reversed(docs)))
    assert fwd == rev
    assert weighted_length_ratio(docs) == weighted_length_ratio(list(reversed(docs)))
    assert comparative_reports(docs) == comparative_reports(list(reversed(docs)))


def test_span_length_samples_shape():
    doc = make_doc(4, 4, [two_sided("a", (0, 4), (0, 4))])
    assert span_length_samples([doc]) == [("TRAN", SOURCE, 4), ("TRAN", TARGET, 4)]
