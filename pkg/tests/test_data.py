from __future__ import annotations

import json

import numpy as np
import pytest

from dzo.data import (
    DataFormatError,
    Dataset,
    Sample,
    dataset_fingerprint,
    fetch_dataset,
    max_feature_norm,
    parse_libsvm,
    partition_iid,
    scale_features_maxabs,
    synthetic_sparse_classification,
    to_libsvm_lines,
)


def _same_dataset(a: Dataset, b: Dataset) -> bool:
    if a.d != b.d or len(a) != len(b):
        return False
    return all(
        sa.label == sb.label
        and np.array_equal(sa.indices, sb.indices)
        and np.array_equal(sa.values, sb.values)
        for sa, sb in zip(a.samples, b.samples)
    )


def test_parse_single_line():
    ds = parse_libsvm("+1 1:2 3:-0.5\n")
    assert ds.d == 3
    s = ds.samples[0]
    assert s.label == 1
    assert np.array_equal(s.indices, [0, 2])
    assert np.array_equal(s.values, [2.0, -0.5])


def test_parse_skips_comments_and_blanks():
    ds = parse_libsvm("# header\n\n+1 1:1 # trailing\n\n-1 2:1\n")
    assert len(ds) == 2
    assert ds.d == 2


def test_parse_label_conventions():
    ds = parse_libsvm("0 1:1\n1 1:1\n-1 1:1\n2 1:1\n")
    assert [s.label for s in ds.samples] == [-1, 1, -1, -1]


def test_parse_custom_label_map():
    ds = parse_libsvm("5 1:1\n", label_map={5.0: 1})
    assert ds.samples[0].label == 1
    with pytest.raises(DataFormatError, match="line 1"):
        parse_libsvm("1 1:1\n", label_map={5.0: 1})


def test_parse_rejects_bad_lines():
    with pytest.raises(DataFormatError, match="line 1"):
        parse_libsvm("+1 3:1 2:1\n")  # non-increasing indices
    with pytest.raises(DataFormatError, match="line 2"):
        parse_libsvm("+1 1:1\n+1 1:x\n")  # unparsable number
    with pytest.raises(DataFormatError, match="line 1"):
        parse_libsvm("+1 11\n")  # malformed token
    with pytest.raises(DataFormatError, match="line 1"):
        parse_libsvm("yes 1:1\n")  # unparsable label
    with pytest.raises(DataFormatError, match="line 1"):
        parse_libsvm("+1 0:1\n")  # index below 1


def test_explicit_d_override():
    ds = parse_libsvm("+1 1:1\n", d=10)
    assert ds.d == 10
    with pytest.raises(ValueError):
        parse_libsvm("+1 5:1\n", d=3)


def test_round_trip_is_identity():
    text = "+1 1:2 3:-0.5\n-1 2:0.1234567890123456 7:3\n+1 4:1e-30\n"
    ds = parse_libsvm(text)
    again = parse_libsvm("\n".join(to_libsvm_lines(ds)))
    assert _same_dataset(ds, again)


def test_partition_small_exact():
    ds = parse_libsvm("+1 1:1\n-1 1:2\n+1 1:3\n-1 1:4\n")
    part = partition_iid(ds, 2, seed=0)
    sizes = [len(a) for a in part.assignments]
    assert sizes == [2, 2]
    covered = sorted(i for a in part.assignments for i in a)
    assert covered == [0, 1, 2, 3]


def test_partition_benchmark_sizes(standin_dataset):
    # 8124 = 20 * 406 + 4: four agents get 407 samples, sixteen get 406.
    part = partition_iid(standin_dataset, 20, seed=1)
    sizes = sorted((len(a) for a in part.assignments), reverse=True)
    assert sizes[:4] == [407] * 4
    assert sizes[4:] == [406] * 16


def test_partition_deterministic(tiny_dataset):
    a = partition_iid(tiny_dataset, 2, seed=9)
    b = partition_iid(tiny_dataset, 2, seed=9)
    assert a.assignments == b.assignments


def test_partition_rejects_too_many_agents(tiny_dataset):
    with pytest.raises(ValueError):
        partition_iid(tiny_dataset, 5, seed=0)


def test_partition_frequencies_uniform():
    # N=20, n=4: every sample lands on each agent with probability 1/4.
    ds = parse_libsvm("".join(f"+1 1:{k + 1}\n" for k in range(20)))
    trials = 1000
    hits = np.zeros((20, 4))
    for seed in range(trials):
        part = partition_iid(ds, 4, seed=seed)
        for agent, idxs in enumerate(part.assignments):
            for k in idxs:
                hits[k, agent] += 1
    freq = hits / trials
    tol = 5 * np.sqrt(0.25 * 0.75 / trials)
    assert np.all(np.abs(freq - 0.25) <= tol)


def test_max_feature_norm_cases():
    assert max_feature_norm(parse_libsvm("+1 1:3 2:4\n")) == pytest.approx(5.0)
    assert max_feature_norm(parse_libsvm("+1 1:0 2:0\n")) == 0.0
    two = parse_libsvm("+1 1:1\n+1 1:1 2:1\n")
    assert max_feature_norm(two) == pytest.approx(np.sqrt(2.0))


def test_scale_features_maxabs():
    ds = parse_libsvm("+1 1:2 2:-4\n-1 1:1\n")
    scaled = scale_features_maxabs(ds)
    assert np.array_equal(scaled.samples[0].values, [1.0, -1.0])
    assert np.array_equal(scaled.samples[1].values, [0.5])


def test_dataset_fingerprint_sensitivity(tiny_dataset):
    base = dataset_fingerprint(tiny_dataset)
    assert base == dataset_fingerprint(tiny_dataset)
    other = Dataset(
        d=tiny_dataset.d,
        samples=tuple(
            Sample(s.indices, s.values, -s.label) for s in tiny_dataset.samples
        ),
    )
    assert dataset_fingerprint(other) != base


def test_synthetic_standin_shape(standin_dataset):
    assert standin_dataset.d == 112
    assert len(standin_dataset) == 8124
    norms = np.array([s.norm() for s in standin_dataset.samples])
    assert np.allclose(norms, np.sqrt(22.0))
    labels = [s.label for s in standin_dataset.samples]
    assert abs(np.mean(labels)) < 0.1  # roughly balanced


def test_synthetic_standin_deterministic():
    a = synthetic_sparse_classification(30, 50, 8, seed=3)
    b = synthetic_sparse_classification(30, 50, 8, seed=3)
    assert _same_dataset(a, b)


def test_fetch_dataset_from_file_url(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    (src / "mushrooms").write_text("+1 1:1\n-1 2:1\n")
    cache = tmp_path / "cache"
    base = src.as_uri()

    path = fetch_dataset("mushrooms", cache, base_url=base)
    assert path.read_text() == "+1 1:1\n-1 2:1\n"
    lock = json.loads((cache / "datasets.lock").read_text())
    assert "mushrooms" in lock

    # Cached + matching checksum: succeeds without redownloading.
    assert fetch_dataset("mushrooms", cache, base_url=base) == path

    # Tampered cache fails against the recorded checksum.
    path.write_text("tampered")
    with pytest.raises(RuntimeError, match="checksum"):
        fetch_dataset("mushrooms", cache, base_url=base)


def test_fetch_dataset_rejects_unknown_name(tmp_path):
    with pytest.raises(ValueError):
        fetch_dataset("nope", tmp_path)
