import math

import numpy as np
import pytest

from sociolens import corpus
from sociolens.corpus import (
    AnnotationRecord,
    ColumnMapping,
    Dataset,
    binarize,
    filter_dataset,
    load_annotations,
    majority_vote,
    save_annotations,
    split_by_text,
)
from sociolens.errors import DataError, DuplicateError, EmptyDatasetError, SchemaError
from sociolens.features import AnnotatorProfile


def write_csv(path, rows, header="text_id,annotator_id,score"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")


def make_dataset(triples, labels=False):
    records = [
        AnnotationRecord(t, a, s, label=(0 if s == 0 else 1) if labels else None)
        for t, a, s in triples
    ]
    return Dataset(records=records)


class TestLoadAnnotations:
    def test_three_distinct_rows(self, tmp_path):
        path = tmp_path / "a.csv"
        write_csv(path, ["t1,a1,0", "t1,a2,2", "t2,a1,1"])
        ds = load_annotations(str(path))
        assert len(ds.records) == 3
        assert ds.records[1] == AnnotationRecord("t1", "a2", 2)

    def test_duplicate_pair_names_rows(self, tmp_path):
        path = tmp_path / "a.csv"
        write_csv(path, ["t1,a1,0", "t1,a1,1"])
        with pytest.raises(DuplicateError, match="rows 2,3"):
            load_annotations(str(path))

    def test_missing_column_is_schema_error(self, tmp_path):
        path = tmp_path / "a.csv"
        write_csv(path, ["t1,a1"], header="text_id,annotator_id")
        with pytest.raises(SchemaError, match="score"):
            load_annotations(str(path))

    def test_non_integer_score(self, tmp_path):
        path = tmp_path / "a.csv"
        write_csv(path, ["t1,a1,high"])
        with pytest.raises(DataError, match="row 2"):
            load_annotations(str(path))

    def test_negative_score(self, tmp_path):
        path = tmp_path / "a.csv"
        write_csv(path, ["t1,a1,-1"])
        with pytest.raises(DataError, match="negative"):
            load_annotations(str(path))

    def test_custom_column_mapping_count_matches_line_count(self, tmp_path):
        # production-shaped export: comment/annotator/score columns
        path = tmp_path / "export.csv"
        rows = [f"c{i},w{i % 7},{i % 3}" for i in range(53)]
        write_csv(path, rows, header="comment,annotator,rating")
        mapping = ColumnMapping(text_id="comment", annotator_id="annotator", score="rating")
        ds = load_annotations(str(path), mapping)
        n_lines = sum(1 for _ in open(path, encoding="utf-8")) - 1  # independent line counter
        assert len(ds.records) == n_lines

    def test_roundtrip_save_load(self, tmp_path):
        ds = make_dataset([("t1", "a1", 0), ("t2", "a2", 3)])
        out = tmp_path / "out.csv"
        save_annotations(ds, str(out))
        again = load_annotations(str(out))
        assert again.records == ds.records


class TestBinarize:
    @pytest.mark.parametrize("score,label", [(0, 0), (1, 1), (4, 1)])
    def test_zero_versus_above(self, score, label):
        ds = binarize(make_dataset([("t", "a", score)]))
        assert ds.records[0].label == label
        assert ds.records[0].raw_score == score

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        triples = [(f"t{i}", f"a{i}", int(rng.integers(0, 5))) for i in range(40)]
        once = binarize(make_dataset(triples))
        twice = binarize(once)
        assert once.records == twice.records


class TestFilterDataset:
    def test_low_volume_annotator_removed(self):
        triples = [(f"t{i}", "busy", 1) for i in range(25)]
        triples += [(f"t{i}", "slacker", 1) for i in range(19)]
        ds, report = filter_dataset(make_dataset(triples, labels=True), 1, 20)
        assert {r.annotator_id for r in ds.records} == {"busy"}
        assert report.removed_annotators == 1
        assert report.removed_records == 19

    def test_under_annotated_text_removed(self):
        triples = [(f"t{i}", "a1", 1) for i in range(30)] + [(f"t{i}", "a2", 1) for i in range(29)]
        # t29 only has a1 after no annotator removals
        ds, report = filter_dataset(make_dataset(triples, labels=True), 2, 20)
        assert "t29" not in {r.text_id for r in ds.records}
        assert report.removed_texts == 1

    def test_vacuous_thresholds_keep_everything(self):
        triples = [("t1", "a1", 0), ("t2", "a2", 1)]
        ds, report = filter_dataset(make_dataset(triples, labels=True), 1, 1)
        assert len(ds.records) == 2
        assert report.removed_records == 0

    def test_single_pass_no_fixpoint(self):
        # after dropping t-texts below the annotator threshold, annotator a2
        # falls under the volume threshold; single-pass keeps them anyway
        triples = [("t1", "a1", 1), ("t1", "a2", 1), ("t2", "a2", 1), ("t2", "a3", 1), ("t3", "a1", 1)]
        ds, _ = filter_dataset(make_dataset(triples, labels=True), 2, 2)
        # a3 (1 record) removed first; t2 then has only a2 -> removed; a2 now has 1 record but stays
        assert {r.annotator_id for r in ds.records} == {"a1", "a2"}
        assert {r.text_id for r in ds.records} == {"t1"}

    def test_counts_sum_consistently(self):
        rng = np.random.default_rng(5)
        triples = {(f"t{rng.integers(0, 30)}", f"a{rng.integers(0, 12)}") for _ in range(300)}
        ds = make_dataset([(t, a, 1) for t, a in triples], labels=True)
        original = len(ds.records)
        filtered, report = filter_dataset(ds, 2, 5)
        assert report.removed_records + report.retained_records == original
        assert report.retained_records == len(filtered.records)

    def test_empty_result_raises(self):
        ds = make_dataset([("t1", "a1", 1)], labels=True)
        with pytest.raises(EmptyDatasetError):
            filter_dataset(ds, 5, 5)

    def test_thresholds_below_one_rejected(self):
        ds = make_dataset([("t1", "a1", 1)], labels=True)
        with pytest.raises(DataError):
            filter_dataset(ds, 0, 1)


class TestSplitByText:
    def make(self, n_texts, per_text=3):
        triples = [(f"t{i:02d}", f"a{j}", 1) for i in range(n_texts) for j in range(per_text)]
        return make_dataset(triples, labels=True)

    def test_cardinality_and_disjoint(self):
        split = split_by_text(self.make(10), 0.7, seed=4)
        train_texts = {r.text_id for r in split.train.records}
        test_texts = {r.text_id for r in split.test.records}
        assert len(train_texts) == math.ceil(0.7 * 10) == 7
        assert len(test_texts) == 3
        assert not (train_texts & test_texts)

    def test_records_travel_with_text(self):
        split = split_by_text(self.make(10), 0.7, seed=4)
        for side in (split.train, split.test):
            counts = {}
            for r in side.records:
                counts[r.text_id] = counts.get(r.text_id, 0) + 1
            assert all(c == 3 for c in counts.values())

    def test_same_seed_identical(self):
        ds = self.make(12)
        a = split_by_text(ds, 0.6, seed=9)
        b = split_by_text(ds, 0.6, seed=9)
        assert a.train.records == b.train.records
        assert a.test.records == b.test.records

    def test_split_independent_of_record_order(self):
        ds = self.make(8)
        reversed_ds = Dataset(records=list(reversed(ds.records)))
        a = split_by_text(ds, 0.5, seed=2)
        b = split_by_text(reversed_ds, 0.5, seed=2)
        assert {r.text_id for r in a.train.records} == {r.text_id for r in b.train.records}

    def test_union_exhaustive_over_seeds(self):
        ds = self.make(9)
        all_texts = {r.text_id for r in ds.records}
        for seed in range(25):
            split = split_by_text(ds, 0.44, seed=seed)
            got = {r.text_id for r in split.train.records} | {r.text_id for r in split.test.records}
            assert got == all_texts

    def test_degenerate_fraction_raises(self):
        with pytest.raises(DataError):
            split_by_text(self.make(2), 0.95, seed=0)  # ceil(1.9) = 2 -> empty test side

    def test_bad_fraction_raises(self):
        with pytest.raises(DataError):
            split_by_text(self.make(4), 1.0, seed=0)

    def test_profiles_follow_annotators(self):
        ds = self.make(6)
        ds.profiles.update({f"a{j}": AnnotatorProfile(f"a{j}") for j in range(3)})
        split = split_by_text(ds, 0.5, seed=1)
        for side in (split.train, split.test):
            assert set(side.profiles) == {r.annotator_id for r in side.records}


class TestMajorityVote:
    def test_strict_majority(self):
        ds = make_dataset([("t", "a1", 1), ("t", "a2", 1), ("t", "a3", 0)], labels=True)
        assert majority_vote(ds) == {"t": 1}

    def test_unanimous_zero(self):
        ds = make_dataset([("t", "a1", 0), ("t", "a2", 0), ("t", "a3", 0)], labels=True)
        assert majority_vote(ds) == {"t": 0}

    def test_tie_rule_matches_exhaustive_enumeration(self):
        # enumerate every vote multiset up to 4 votes; ties must resolve to 1
        for ones in range(5):
            for zeros in range(5):
                if ones + zeros == 0:
                    continue
                triples = [("t", f"p{i}", 1) for i in range(ones)]
                triples += [("t", f"n{i}", 0) for i in range(zeros)]
                expected = 1 if ones >= zeros else 0
                assert majority_vote(make_dataset(triples, labels=True)) == {"t": expected}, (ones, zeros)

    def test_requires_labels(self):
        with pytest.raises(DataError):
            majority_vote(make_dataset([("t", "a", 1)]))


def test_stats_match_records():
    ds = binarize(make_dataset([("t1", "a1", 0), ("t1", "a2", 2), ("t2", "a1", 1)]))
    stats = ds.stats
    assert stats.records == 3
    assert stats.unique_texts == 2
    assert stats.unique_annotators == 2
    assert stats.label_counts == {0: 1, 1: 2}


def test_attach_profiles_requires_coverage():
    ds = make_dataset([("t1", "a1", 1), ("t2", "a2", 1)])
    with pytest.raises(DataError, match="a2"):
        corpus.attach_profiles(ds, {"a1": AnnotatorProfile("a1")})
