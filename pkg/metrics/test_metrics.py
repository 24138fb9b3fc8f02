"""
Test cases for IoU, mIoU accumulation and report rendering.
"""
import random
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, TestCase
from hypothesis import given, settings as hsettings, strategies as st
from hypothesis.extra.numpy import arrays

from diffss.exceptions import DegenerateInput, DimensionMismatch, ReportMismatch

from .models import EvaluationReport
from .persistence import read_report, register_report, rerender, write_report
from .reports import (
    FoldReport,
    build_fold_report,
    gain,
    guidance_table,
    published_table,
    render_csv,
    render_table,
    xshot_table,
)
from .scores import ClassIoU, IoUAccumulator, iou, miou

masks16 = arrays(np.uint8, (16, 16), elements=st.integers(0, 1))


def brute_iou(pred, gt):
    inter = union = 0
    for p, g in zip(pred.ravel().tolist(), gt.ravel().tolist()):
        inter += p and g
        union += p or g
    return 1.0 if union == 0 else inter / union


def report(mean_by_fold, **config):
    base = {'dataset': 'pascal5i', 'phase': 'test', 'k_original': 1, 'n_aux': 0, 'guidance': 'segmap',
            'seed': 0, 'segmenter': 'reference', 'episodes': 40}
    base.update(config)
    return FoldReport(config=base, folds=dict(mean_by_fold))


class IoUTestCase(SimpleTestCase):
    """Test cases for single-mask IoU."""

    def test_identical(self):
        """Test that identical nonempty masks score 1."""
        mask = np.zeros((4, 4), dtype=np.uint8)
        mask[1:3, 1:3] = 1
        self.assertEqual(iou(mask, mask), 1.0)

    def test_disjoint(self):
        """Test that disjoint masks score 0."""
        a = np.zeros((4, 4), dtype=np.uint8)
        b = np.zeros((4, 4), dtype=np.uint8)
        a[0, 0] = b[3, 3] = 1
        self.assertEqual(iou(a, b), 0.0)

    def test_shifted_block(self):
        """Test that a 2x2 block shifted one column scores exactly 1/3."""
        pred = np.zeros((4, 4), dtype=np.uint8)
        gt = np.zeros((4, 4), dtype=np.uint8)
        pred[1:3, 0:2] = 1
        gt[1:3, 1:3] = 1
        self.assertEqual(iou(pred, gt), 2 / 6)
        self.assertEqual(iou(pred, gt), 1 / 3)

    def test_both_empty(self):
        """Test the empty-versus-empty convention and that it is logged."""
        empty = np.zeros((3, 3), dtype=np.uint8)
        with self.assertLogs('metrics.scores', level='INFO'):
            self.assertEqual(iou(empty, empty), 1.0)

    def test_dimension_mismatch(self):
        """Test that masks of different sizes are refused."""
        with self.assertRaises(DimensionMismatch):
            iou(np.zeros((3, 3), dtype=np.uint8), np.zeros((3, 4), dtype=np.uint8))

    @hsettings(max_examples=200, deadline=None)
    @given(masks16, masks16)
    def test_matches_pixel_count_oracle(self, pred, gt):
        """Test that IoU equals a brute-force count, is symmetric and lies in [0, 1]."""
        value = iou(pred, gt)
        self.assertEqual(value, brute_iou(pred, gt))
        self.assertEqual(value, iou(gt, pred))
        self.assertTrue(0.0 <= value <= 1.0)

    def test_thousand_random_pairs(self):
        """Test the oracle over 1,000 seeded 16x16 pairs."""
        rng = np.random.default_rng(0)
        for _ in range(1000):
            pred = (rng.random((16, 16)) < rng.random()).astype(np.uint8)
            gt = (rng.random((16, 16)) < rng.random()).astype(np.uint8)
            self.assertEqual(iou(pred, gt), brute_iou(pred, gt))


class MIoUTestCase(SimpleTestCase):
    """Test cases for class-averaged IoU."""

    def test_single_class(self):
        """Test that one class at 0.5 gives 0.5."""
        self.assertEqual(miou([ClassIoU(1, 1, 2)]), 0.5)

    def test_two_classes(self):
        """Test that IoUs of 1 and 0 average to 0.5."""
        self.assertEqual(miou([ClassIoU(1, 3, 3), ClassIoU(2, 0, 5)]), 0.5)

    def test_empty_list(self):
        """Test that no classes is an error."""
        with self.assertRaises(DegenerateInput):
            miou([])

    def test_invalid_counts(self):
        """Test that intersection above union is refused."""
        with self.assertRaises(DegenerateInput):
            ClassIoU(1, 5, 4)

    def test_order_invariant(self):
        """Test that shuffling classes never changes mIoU."""
        rng = random.Random(3)
        entries = [ClassIoU(c, rng.randint(0, 50), 50 + rng.randint(0, 50)) for c in range(1, 21)]
        expected = miou(entries)
        for _ in range(20):
            rng.shuffle(entries)
            self.assertEqual(miou(entries), expected)

    def test_streaming_equals_batch(self):
        """Test that accumulated and merged mIoU equals recomputation from stored masks."""
        rng = np.random.default_rng(7)
        stored = []
        for _ in range(300):
            c = int(rng.integers(1, 6))
            pred = (rng.random((16, 16)) < 0.5).astype(np.uint8)
            gt = (rng.random((16, 16)) < 0.5).astype(np.uint8)
            stored.append((c, pred, gt))

        parts = [IoUAccumulator() for _ in range(4)]
        for n, (c, pred, gt) in enumerate(stored):
            parts[n % 4].update(c, pred, gt)
        merged = parts[3].merge(parts[1]).merge(parts[0].merge(parts[2]))

        per_class = {}
        for c, pred, gt in stored:
            i, u = per_class.get(c, (0, 0))
            per_class[c] = (i + int((pred & gt).sum()), u + int((pred | gt).sum()))
        batch = sum(i / u for i, u in per_class.values()) / len(per_class)

        self.assertAlmostEqual(merged.miou(), batch, delta=1e-12)
        single = IoUAccumulator()
        for c, pred, gt in stored:
            single.update(c, pred, gt)
        self.assertEqual(single.per_class(), merged.per_class())


class ReportTestCase(SimpleTestCase):
    """Test cases for fold reports and gains."""

    def test_mean_of_folds(self):
        """Test that the mean is the arithmetic mean of folds."""
        r = report({0: 0.61, 1: 0.72, 2: 0.58, 3: 0.66})
        self.assertAlmostEqual(r.mean, (0.61 + 0.72 + 0.58 + 0.66) / 4, delta=1e-12)

    def test_published_gain(self):
        """Test the +1.5/3.1 gain of a 67.8 -> 69.3 run with a 70.9 five-shot reference."""
        base = report({0: 0.678})
        augmented = report({0: 0.693}, n_aux=4)
        kshot = report({0: 0.709}, k_original=5)
        record = gain(base, augmented, kshot)
        self.assertEqual(record.text, '+1.5/3.1')
        self.assertEqual(gain(base, augmented).text, '+1.5')

    def test_scribble_gain(self):
        """Test that 69.4 -> 70.2 reads +0.8."""
        self.assertEqual(gain(report({0: 0.694}), report({0: 0.702}, n_aux=4)).text, '+0.8')

    def test_identical_reports(self):
        """Test that identical reports gain +0.0."""
        r = report({0: 0.5, 1: 0.6})
        record = gain(r, r)
        self.assertEqual(record.delta, 0.0)
        self.assertEqual(record.text, '+0.0')

    def test_config_mismatch(self):
        """Test that reports of different datasets or folds cannot be compared."""
        with self.assertRaises(ReportMismatch):
            gain(report({0: 0.5}), report({0: 0.6}, dataset='fss1000'))
        with self.assertRaises(ReportMismatch):
            gain(report({0: 0.5}), report({1: 0.6}))

    def test_build_from_accumulators(self):
        """Test that fold mIoU comes from each fold's accumulator."""
        acc = IoUAccumulator()
        acc.update(1, np.ones((2, 2), dtype=np.uint8), np.ones((2, 2), dtype=np.uint8))
        acc.update(2, np.ones((2, 2), dtype=np.uint8), np.zeros((2, 2), dtype=np.uint8))
        r = build_fold_report({'dataset': 'synthetic'}, {0: acc}, episodes=2)
        self.assertEqual(r.folds, {0: 0.5})
        self.assertEqual([c.class_index for c in r.per_class[0]], [1, 2])

    def test_table_layout(self):
        """Test that the text table has fold columns then the mean."""
        text = render_table([report({0: 0.678, 1: 0.5}, label='BAM'), report({0: 0.693, 1: 0.55}, label='BAM+aux')])
        lines = text.splitlines()
        self.assertEqual(lines[0].split(), ['Method', 'Fold-0', 'Fold-1', 'Mean'])
        self.assertEqual(lines[1].split(), ['BAM', '67.8', '50.0', '58.9'])

    def test_guidance_and_xshot_tables(self):
        """Test the guidance ablation and auxiliary-count tables."""
        base = report({0: 0.678})
        text = guidance_table([('segmap', base, report({0: 0.693}, n_aux=4), report({0: 0.709}, k_original=5))])
        self.assertIn('+1.5/3.1', text)

        sweep = [report({0: 0.60 + n / 100}, n_aux=n) for n in (4, 0, 2)]
        lines = xshot_table(sweep).splitlines()
        self.assertEqual([line.split()[0] for line in lines[1:]], ['0', '2', '4'])
        self.assertEqual(lines[-1].split()[-1], '+4.0')

    def test_published_table(self):
        """Test that published figures render one row each with a dash for missing values."""
        lines = published_table().splitlines()
        self.assertEqual(lines[0].split(), ['Published', '1-shot', '+aux', 'K-shot'])
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[1].startswith('BAM / pascal5i / segmap'))
        self.assertEqual(lines[1].split()[-3:], ['67.8', '69.3', '70.9'])
        self.assertEqual(lines[3].split()[-3:], ['85.19', '86.2', '-'])

    def test_xshot_needs_baseline(self):
        """Test that a sweep without n_aux=0 is refused."""
        with self.assertRaises(ReportMismatch):
            xshot_table([report({0: 0.6}, n_aux=2)])

    def test_csv_rows(self):
        """Test one CSV row per class per fold."""
        acc = IoUAccumulator()
        for c in (1, 2, 3):
            acc.update(c, np.ones((2, 2), dtype=np.uint8), np.ones((2, 2), dtype=np.uint8))
        r = build_fold_report({'dataset': 'synthetic'}, {0: acc, 1: acc})
        self.assertEqual(len(render_csv([r]).splitlines()), 1 + 6)


class ReportPersistenceTestCase(TestCase):
    """Test cases for report files and registration."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        acc = IoUAccumulator()
        acc.update(3, np.eye(4, dtype=np.uint8), np.ones((4, 4), dtype=np.uint8))
        self.report = build_fold_report({'dataset': 'synthetic', 'k_original': 1, 'n_aux': 4, 'seed': 1,
                                         'phase': 'test', 'segmenter': 'reference', 'guidance': 'hed'},
                                        {0: acc}, episodes=1)

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip_is_byte_stable(self):
        """Test that a stored report re-renders to the same bytes."""
        path = write_report(self.root / 'report.json', self.report)
        reloaded = read_report(path)
        self.assertEqual(reloaded.folds, self.report.folds)
        self.assertEqual(reloaded.per_class, self.report.per_class)
        self.assertEqual(rerender(path), path.read_text(encoding='utf-8'))

    def test_register(self):
        """Test that registration upserts one row per label."""
        path = write_report(self.root / 'report.json', self.report)
        register_report(self.report, path, self.root)
        register_report(self.report, path, self.root)
        row = EvaluationReport.objects.get()
        self.assertEqual(row.n_aux, 4)
        self.assertAlmostEqual(row.mean_miou, 0.25)
