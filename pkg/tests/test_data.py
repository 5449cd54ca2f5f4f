"""Ingestion, domain-conversion, and adversarial-subset selection tests."""

import numpy as np
import pytest
import torch
from PIL import Image

from edgepatch import data, maskops, synthetic


@pytest.fixture(scope="module")
def tiny_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny_corpus")
    synthetic.generate_corpus(root, n_classes=2, train_per_class=3, val_per_class=2, seed=9)
    return root


def test_load_counts_and_order(tiny_root):
    index = data.load_dataset(tiny_root, "train")
    assert len(index) == 6
    paths = [r.source_path for r in index.records]
    assert paths == sorted(paths)
    assert index.split == data.Split.train
    assert len(index.class_names) == 2


def test_record_canonical_form(tiny_root):
    index = data.load_dataset(tiny_root, "train")
    for rec in index.records:
        assert rec.image.shape == (3, 128, 128)
        assert rec.image.min() >= 0.0 and rec.image.max() <= 1.0
        assert rec.seg_mask.shape == (1, 128, 128)
        assert set(np.unique(rec.seg_mask)).issubset({0, 1})
        assert rec.label < len(index.class_names)
    ids = [r.id for r in index.records]
    assert len(set(ids)) == len(ids)


def test_ingestion_idempotent(tiny_root):
    a = data.load_dataset(tiny_root, "val")
    b = data.load_dataset(tiny_root, "val")
    assert [r.id for r in a.records] == [r.id for r in b.records]
    for ra, rb in zip(a.records, b.records):
        assert np.array_equal(ra.image, rb.image)
        assert np.array_equal(ra.seg_mask, rb.seg_mask)


def test_non_canonical_input_resized(tmp_path):
    root = tmp_path / "odd"
    (root / "train" / "images" / "0").mkdir(parents=True)
    (root / "train" / "masks" / "0").mkdir(parents=True)
    with open(root / "classes.csv", "w") as fh:
        fh.write("class_id,name\n0,thing\n")
    rgb = (np.random.default_rng(0).random((48, 64, 3)) * 255).astype(np.uint8)
    Image.fromarray(rgb).save(root / "train" / "images" / "0" / "a.png")
    mask = np.zeros((48, 64), dtype=np.uint8)
    mask[10:40, 15:55] = 255
    Image.fromarray(mask).save(root / "train" / "masks" / "0" / "a.png")
    index = data.load_dataset(root, "train")
    rec = index.records[0]
    assert rec.image.shape == (3, 128, 128)
    assert 0.0 <= rec.image.min() and rec.image.max() <= 1.0
    assert rec.seg_mask.shape == (1, 128, 128)
    assert rec.seg_mask.sum() > 0


def test_missing_mask_is_fatal_and_names_file(tiny_root, tmp_path):
    import shutil

    root = tmp_path / "broken"
    shutil.copytree(tiny_root, root)
    victims = sorted((root / "train" / "masks" / "0").glob("*.png"))
    victims[0].unlink()
    with pytest.raises(data.DataError, match=victims[0].name):
        data.load_dataset(root, "train")


def test_empty_class_dir_warns_and_skips(tiny_root, tmp_path):
    import shutil

    root = tmp_path / "sparse"
    shutil.copytree(tiny_root, root)
    for p in (root / "train" / "images" / "1").glob("*.png"):
        p.unlink()
    with pytest.warns(UserWarning, match="empty class directory"):
        index = data.load_dataset(root, "train")
    assert all(r.label == 0 for r in index.records)


# ---------------------------------------------------------------------------
# domain conversions
# ---------------------------------------------------------------------------


def test_domain_maps_fixed_points():
    assert data.to_internal(0.5) == 0.0
    assert data.to_internal(0.0) == -1.0
    assert data.to_internal(1.0) == 1.0
    assert data.to_unit(0.0) == 0.5
    assert data.to_unit(-1.0) == 0.0
    assert data.to_unit(1.0) == 1.0


def test_domain_round_trip_bit_exact():
    rng = np.random.default_rng(123)
    v = rng.random((3, 32, 32))  # float64
    again = data.to_unit(data.to_internal(v))
    assert np.array_equal(v, again)
    t = torch.from_numpy(v)
    assert torch.equal(data.to_unit(data.to_internal(t)), t)


def test_domain_violations_raise():
    with pytest.raises(data.DataError):
        data.to_internal(np.array([1.1]))
    with pytest.raises(data.DataError):
        data.to_internal(np.array([-0.01]))
    with pytest.raises(data.DataError):
        data.to_unit(np.array([1.5]))
    with pytest.raises(data.DataError):
        data.to_internal(np.array([np.nan]))


# ---------------------------------------------------------------------------
# adversarial test-set selection
# ---------------------------------------------------------------------------


class StubClassifier:
    """Duck-typed stand-in: decodes the label planted in the image corner."""

    def __init__(self, wrong_ids=()):
        self.wrong_ids = set(wrong_ids)

    def predict_labels(self, images):
        out = []
        for im in images:
            true = int(round(im[0, 0, 0] * 100))
            marker = int(round(im[1, 0, 0] * 1000))
            out.append(true + 1 if marker in self.wrong_ids else true)
        return np.array(out)


def _index(counts):
    """counts: {label: n_records}; record i of a class carries marker label*1000+i."""
    records = []
    for label, n in counts.items():
        for i in range(n):
            img = np.zeros((3, 8, 8))
            img[0, 0, 0] = label / 100.0
            img[1, 0, 0] = (label * 1000 + i) / 1000.0
            records.append(
                data.ImageRecord(
                    id=f"{label}/{i}",
                    image=img,
                    label=label,
                    seg_mask=np.ones((1, 8, 8), dtype=np.uint8),
                    source_path=f"{label}/{i}.png",
                )
            )
    return data.DatasetIndex(records=tuple(records), class_names=("a", "b", "c"), split=data.Split.train)


def test_adv_testset_first_k_selected():
    index = _index({0: 10, 1: 10})
    clf = StubClassifier(wrong_ids={0, 4, 7})  # class 0 keeps 7 of 10 eligible
    out = data.build_adv_testset(index, [clf], k=5)
    zero = [r for r in out.records if r.label == 0]
    assert len(zero) == 5
    # first five eligible in deterministic order: indices 1,2,3,5,6
    assert [r.id for r in zero] == ["0/1", "0/2", "0/3", "0/5", "0/6"]
    assert out.split == data.Split.adv_test


def test_adv_testset_excludes_short_classes():
    index = _index({0: 10, 1: 10})
    clf = StubClassifier(wrong_ids={1000 + i for i in range(7)})  # class 1: only 3 left
    out = data.build_adv_testset(index, [clf], k=5)
    assert {r.label for r in out.records} == {0}
    assert len(out.records) == 5


def test_adv_testset_intersection_and_order_invariance():
    index = _index({0: 8, 1: 8})
    a = StubClassifier(wrong_ids={0, 1})
    b = StubClassifier(wrong_ids={2, 1001})
    out_ab = data.build_adv_testset(index, [a, b], k=4)
    out_ba = data.build_adv_testset(index, [b, a], k=4)
    assert [r.id for r in out_ab.records] == [r.id for r in out_ba.records]
    # every selected record is correct under every classifier
    for clf in (a, b):
        preds = clf.predict_labels(np.stack([r.image for r in out_ab.records]))
        assert np.array_equal(preds, [r.label for r in out_ab.records])


def test_adv_testset_empty_errors():
    index = _index({0: 4})
    clf = StubClassifier(wrong_ids={0, 1, 2, 3})
    with pytest.raises(data.DataError, match="empty adversarial test set"):
        data.build_adv_testset(index, [clf], k=2)
    with pytest.raises(data.DataError):
        data.build_adv_testset(index, [], k=2)
    with pytest.raises(data.DataError):
        data.build_adv_testset(index, [clf], k=0)


# ---------------------------------------------------------------------------
# synthetic corpus properties
# ---------------------------------------------------------------------------


def test_synthetic_masks_are_clean_single_components(tiny_root):
    index = data.load_dataset(tiny_root, "train")
    for rec in index.records:
        filled = maskops.extract_filled_mask(rec.seg_mask)
        # board masks are already solid: extraction changes nothing
        assert np.array_equal(filled, rec.seg_mask)
        pair = maskops.make_ring_mask(filled, 0.04)
        assert pair.ring.sum() > 0


def test_synthetic_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    synthetic.generate_corpus(a, n_classes=2, train_per_class=2, val_per_class=1, seed=5)
    synthetic.generate_corpus(b, n_classes=2, train_per_class=2, val_per_class=1, seed=5)
    files_a = sorted(p.relative_to(a) for p in a.rglob("*.png"))
    files_b = sorted(p.relative_to(b) for p in b.rglob("*.png"))
    assert files_a == files_b
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_synthetic_classes_look_distinct():
    rng_a = np.random.default_rng(1)
    rng_b = np.random.default_rng(1)
    img0, _ = synthetic.make_record(0, rng_a)  # red rim
    img1, _ = synthetic.make_record(1, rng_b)  # blue rim, same nuisance draw
    assert np.abs(img0 - img1).max() > 0.3
