"""Report ingestion, false-negative matching, majority filtering, sampling,
extrapolation, and table rendering."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solbugsmith.errors import (DomainError, FormatError, MissingThreshold,
                                ScopeError)
from solbugsmith.evaluator import (MISCELLANEOUS, Finding, FPCell,
                                   derive_thresholds,
                                   estimate_false_positives,
                                   filter_by_majority, fn_cell,
                                   ingest_report, load_capabilities,
                                   render_fn_table, render_fp_table,
                                   restrict_to_scope, sample_for_inspection,
                                   score_false_negatives)
from solbugsmith.injector import BugLogEntry
from solbugsmith.model import Approach, BugType


def entry(bug_id, bug_type, start, end, file="a.sol"):
    return BugLogEntry(bug_id, bug_type, Approach.FULL_SNIPPET, None,
                       file, start, end, 0, 1)


def finding(line, bug_type, file="a.sol", tool="t1"):
    return Finding(tool, file, line, bug_type)


class TestIngest:
    def test_normalized_array(self):
        text = json.dumps([
            {"tool": "osiris", "file": "a.sol", "line": 3,
             "type": "Reentrancy"},
            {"tool": "osiris", "file": "a.sol", "line": 9,
             "type": "assembly-usage", "message": "odd"},
        ])
        got = ingest_report(text)
        assert got[0].reported_type is BugType.REENTRANCY
        assert got[1].reported_type is None
        assert got[1].type_label == MISCELLANEOUS
        assert got[1].message == "odd"

    def test_oracle_document_supplies_tool(self):
        text = json.dumps({"tool": "mythril", "findings": [
            {"file": "b.sol", "line": 2, "type": "TxOrigin"},
        ]})
        got = ingest_report(text, adapter="synthetic-oracle")
        assert got == [Finding("mythril", "b.sol", 2, BugType.TX_ORIGIN)]

    def test_explicit_tool_beats_filename_fallback(self):
        text = json.dumps([{"file": "a.sol", "line": 1, "type": "TOD"}])
        got = ingest_report(text, tool="slither")
        assert got[0].tool == "slither"

    @pytest.mark.parametrize("bad, index", [
        ([{"file": "a.sol", "line": 1, "type": "TOD"},
          {"file": "a.sol", "line": 0, "type": "TOD"}], 2),
        ([{"file": "a.sol", "line": True, "type": "TOD"}], 1),
        ([{"line": 4, "type": "TOD"}], 1),
        ([{"file": "a.sol", "line": 4, "tool": ""}], 1),
        ([{"file": "a.sol", "line": 4, "message": 9}], 1),
    ])
    def test_bad_finding_reports_its_index(self, bad, index):
        with pytest.raises(FormatError) as err:
            ingest_report(json.dumps(bad), tool="x")
        assert err.value.line == index

    def test_rejects_non_json_and_wrong_shape(self):
        with pytest.raises(FormatError):
            ingest_report("not json at all")
        with pytest.raises(FormatError):
            ingest_report(json.dumps({"findings": []}))  # array expected
        with pytest.raises(FormatError):
            ingest_report(json.dumps([1, 2]))
        with pytest.raises(FormatError):
            ingest_report("[]", adapter="sarif")


class TestScope:
    def test_out_of_scope_entries_dropped(self):
        entries = [entry("b0", BugType.REENTRANCY, 1, 2),
                   entry("b1", BugType.TOD, 3, 4)]
        kept = restrict_to_scope(entries, {BugType.TOD})
        assert [e.bug_id for e in kept] == ["b1"]

    def test_empty_capability_set_rejected(self):
        with pytest.raises(ScopeError):
            restrict_to_scope([], frozenset())


class TestFalseNegatives:
    def test_perfect_report_detects_everything(self):
        entries = [entry("b0", BugType.REENTRANCY, 3, 6),
                   entry("b1", BugType.REENTRANCY, 10, 12)]
        findings = [finding(4, BugType.REENTRANCY),
                    finding(11, BugType.REENTRANCY)]
        score = score_false_negatives(entries, findings)
        assert (score.detected, score.misidentified, score.unreported) \
            == (2, 0, 0)
        assert set(score.detected_bug_ids) == {"b0", "b1"}

    def test_wrong_type_at_injected_line_is_misidentified(self):
        entries = [entry("b0", BugType.REENTRANCY, 3, 6)]
        findings = [finding(4, BugType.TOD)]
        score = score_false_negatives(entries, findings)
        assert (score.detected, score.misidentified, score.unreported) \
            == (0, 1, 0)
        assert score.misidentified_bug_ids == ("b0",)

    def test_silent_bug_is_unreported(self):
        entries = [entry("b0", BugType.TX_ORIGIN, 3, 6)]
        score = score_false_negatives(entries, [])
        assert score.unreported == 1
        assert score.unreported_bug_ids == ("b0",)

    def test_line_slack_widens_the_match_window(self):
        entries = [entry("b0", BugType.TOD, 5, 7)]
        findings = [finding(8, BugType.TOD)]
        assert score_false_negatives(entries, findings).detected == 0
        assert score_false_negatives(entries, findings,
                                     line_slack=1).detected == 1

    def test_findings_in_other_files_do_not_match(self):
        entries = [entry("b0", BugType.TOD, 5, 7, file="a.sol")]
        findings = [finding(6, BugType.TOD, file="b.sol")]
        assert score_false_negatives(entries, findings).unreported == 1

    def test_type_correct_pairing_wins_over_line_only(self):
        # Both entries cover the finding's line; the matcher must burn the
        # type-correct one, leaving the other misidentified, not unreported.
        entries = [entry("b0", BugType.REENTRANCY, 3, 9),
                   entry("b1", BugType.TOD, 3, 9)]
        findings = [finding(5, BugType.TOD),
                    finding(6, BugType.REENTRANCY)]
        score = score_false_negatives(entries, findings)
        assert score.detected == 2
        assert score.unreported == 0

    def test_one_finding_cannot_cover_two_bugs(self):
        entries = [entry("b0", BugType.TOD, 3, 9),
                   entry("b1", BugType.TOD, 3, 9)]
        findings = [finding(5, BugType.TOD)]
        score = score_false_negatives(entries, findings)
        assert (score.detected, score.unreported) == (1, 1)

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_counts_partition_the_injected_set(self, data):
        n = data.draw(st.integers(1, 8))
        entries = []
        for i in range(n):
            start = data.draw(st.integers(1, 30))
            end = start + data.draw(st.integers(0, 5))
            bug_type = data.draw(st.sampled_from(list(BugType)))
            entries.append(entry(f"b{i}", bug_type, start, end))
        findings = [
            finding(data.draw(st.integers(1, 40)),
                    data.draw(st.sampled_from(list(BugType))))
            for _ in range(data.draw(st.integers(0, 10)))
        ]
        score = score_false_negatives(entries, findings)
        assert score.injected == n
        assert score.detected + score.misidentified + score.unreported == n
        ids = (set(score.detected_bug_ids) | set(score.misidentified_bug_ids)
               | set(score.unreported_bug_ids))
        assert ids == {e.bug_id for e in entries}
        assert len(score.detected_bug_ids) == score.detected
        assert len(score.misidentified_bug_ids) == score.misidentified
        assert len(score.unreported_bug_ids) == score.unreported


class TestMajorityFilter:
    THRESHOLDS = {bt: 2 for bt in BugType}

    def test_injected_line_findings_never_become_candidates(self):
        entries = [entry("b0", BugType.TOD, 4, 6)]
        findings = [finding(5, BugType.REENTRANCY),
                    finding(9, BugType.REENTRANCY)]
        res = filter_by_majority(findings, entries, self.THRESHOLDS)
        assert [f.line for f in res.candidates] == [9]

    def test_agreement_at_threshold_excludes(self):
        findings = [finding(9, BugType.TOD, tool="t1"),
                    finding(9, BugType.TOD, tool="t2")]
        res = filter_by_majority(findings, [], self.THRESHOLDS)
        assert len(res.excluded) == 2
        assert res.filtered == ()

    def test_agreement_below_threshold_filters(self):
        findings = [finding(9, BugType.TOD, tool="t1")]
        res = filter_by_majority(findings, [], self.THRESHOLDS)
        assert res.filtered == (findings[0],)
        assert res.excluded == ()

    def test_same_tool_repeating_itself_is_not_agreement(self):
        findings = [finding(9, BugType.TOD, tool="t1"),
                    finding(9, BugType.TOD, tool="t1")]
        res = filter_by_majority(findings, [], self.THRESHOLDS)
        assert len(res.filtered) == 2

    def test_agreement_requires_same_line_and_type(self):
        findings = [finding(9, BugType.TOD, tool="t1"),
                    finding(9, BugType.REENTRANCY, tool="t2"),
                    finding(10, BugType.TOD, tool="t3")]
        res = filter_by_majority(findings, [], self.THRESHOLDS)
        assert len(res.filtered) == 3

    def test_unknown_type_routes_to_miscellaneous(self):
        findings = [finding(9, None, tool="t1"),
                    finding(9, None, tool="t2")]
        res = filter_by_majority(findings, [], self.THRESHOLDS)
        assert len(res.miscellaneous) == 2
        assert res.filtered == () and res.excluded == ()

    def test_missing_threshold_is_an_error(self):
        findings = [finding(9, BugType.TOD)]
        with pytest.raises(MissingThreshold):
            filter_by_majority(findings, [], {})


class TestThresholds:
    def test_strict_majority_of_capable_tools(self):
        caps = {
            "t1": frozenset({BugType.TOD, BugType.REENTRANCY}),
            "t2": frozenset({BugType.TOD, BugType.REENTRANCY}),
            "t3": frozenset({BugType.TOD}),
            "t4": frozenset({BugType.TOD}),
            "t5": frozenset({BugType.TOD}),
            "t6": frozenset({BugType.TOD}),
        }
        got = derive_thresholds(caps)
        assert got[BugType.TOD] == 4          # 6 capable
        assert got[BugType.REENTRANCY] == 2   # 2 capable
        assert got[BugType.TX_ORIGIN] == 1    # none capable

    def test_bundled_capabilities_load(self, capabilities):
        thresholds = derive_thresholds(capabilities)
        assert set(thresholds) == set(BugType)
        assert all(t >= 1 for t in thresholds.values())

    def test_unknown_type_name_rejected(self):
        with pytest.raises(ValueError):
            load_capabilities(json.dumps({"t": ["Reentrancy", "BadName"]}))


class TestSampling:
    def test_small_sets_pass_through_in_order(self):
        findings = [finding(i, BugType.TOD) for i in range(1, 6)]
        assert sample_for_inspection(findings, size=20) == findings

    def test_large_sets_sampled_deterministically(self):
        findings = [finding(i, BugType.TOD) for i in range(1, 101)]
        first = sample_for_inspection(findings, size=20, seed=9)
        second = sample_for_inspection(findings, size=20, seed=9)
        assert first == second
        assert len(first) == 20
        assert set(first) <= set(findings)
        assert sample_for_inspection(findings, size=20, seed=10) != first


class TestEstimation:
    def test_proportional_extrapolation(self):
        assert estimate_false_positives(40, 20, 16) == 32

    def test_rounds_half_away_from_zero(self):
        assert estimate_false_positives(5, 2, 1) == 3  # 2.5 rounds up

    def test_zero_sampled_means_zero_estimate(self):
        assert estimate_false_positives(10, 0, 0) == 0

    @pytest.mark.parametrize("filtered, sampled, confirmed", [
        (10, 20, 5),    # sampled beyond the filtered set
        (10, 5, 6),     # confirmed beyond the sample
        (10, 5, -1),
    ])
    def test_inconsistent_counts_rejected(self, filtered, sampled, confirmed):
        with pytest.raises(DomainError):
            estimate_false_positives(filtered, sampled, confirmed)

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_estimate_stays_within_the_filtered_set(self, data):
        filtered = data.draw(st.integers(0, 500))
        sampled = data.draw(st.integers(0, filtered))
        confirmed = data.draw(st.integers(0, sampled))
        got = estimate_false_positives(filtered, sampled, confirmed)
        assert 0 <= got <= filtered
        if sampled and confirmed == sampled:
            assert got == filtered


class TestRendering:
    def test_cell_shows_missed_and_unreported(self):
        assert fn_cell(1343, 1237, 106) == "1343 (106)"

    def test_cell_check_mark_when_nothing_missed(self):
        assert fn_cell(50, 0, 0) == "✓"

    def test_cell_na_when_out_of_scope_or_empty(self):
        assert fn_cell(50, 1, 2, capable=False) == "NA"
        assert fn_cell(0, 0, 0) == "NA"

    def test_fn_table_scopes_by_capability(self):
        from solbugsmith.evaluator import FNScore
        scores = {"t1": {BugType.TOD: FNScore(10, 8, 1, 1)},
                  "t2": {BugType.TOD: FNScore(10, 10, 0, 0)}}
        caps = {"t1": frozenset({BugType.TOD}), "t2": frozenset()}
        table = render_fn_table(scores, caps)
        lines = table.strip().split("\n")
        assert lines[0] == "| Bug type | t1 | t2 |"
        assert len(lines) == 2 + len(BugType)
        tod_row = next(l for l in lines if l.startswith("| TOD"))
        assert tod_row == "| TOD | 2 (1) | NA |"

    def test_fp_table_shows_thresholds_and_misc(self):
        cells = {"t1": {BugType.TOD: FPCell(47, 44, 44)}}
        table = render_fp_table(cells, {BugType.TOD: 3}, {"t1": 5})
        lines = table.strip().split("\n")
        assert lines[0] == "| Bug type | Threshold | t1 (Reported/FIL/FP) |"
        assert "| TOD | 3 | 47/44/44 |" in lines
        assert f"| {MISCELLANEOUS} | - | 5/-/- |" in lines
        missing = next(l for l in lines if l.startswith("| Reentrancy"))
        assert missing.endswith("| NA |")
