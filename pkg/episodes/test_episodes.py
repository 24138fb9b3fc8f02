"""
Test cases for manifests, episode sampling, K to X-shot extension and the MiniCOCO builder.
"""
import math
import tempfile
from collections import Counter
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from conditions.controls import build_condition, voc_palette
from conditions.models import GuidanceKind
from diffss.exceptions import (
    DimensionMismatch,
    InsufficientSamples,
    InvalidEpisode,
    ManifestError,
    ProvenanceMismatch,
    StratumError,
)
from diffss.storage import write_jsonl, write_mask_png, write_png
from generation.images import GeneratedImage, Provenance

from .extension import extend_episode
from .manifest import ManifestRecord, class_mask, load_manifest, load_support, size_bucket, write_manifest
from .minicoco import REFERENCE_SIZES, build_minicoco
from .samples import Episode, QuerySample, SupportSample
from .sampling import (
    episode_stream,
    read_episode_dump,
    sample_episode,
    sample_episode_spec,
    write_episode_dump,
)
from .splits import SplitSpec, make_split
from .synthetic import make_synthetic_dataset, synthetic_class_names


def record(record_id, classes, sizes=None):
    return ManifestRecord(id=record_id, image=f'i/{record_id}.png', mask=f'm/{record_id}.png',
                          classes=classes, sizes=sizes or ['medium'] * len(classes))


def synthetic_pool(per_class, classes=(1, 2, 3, 4)):
    return [record(f'c{c}-{n:03d}', [c]) for c in classes for n in range(per_class)]


def toy_episode(rng, size=8, support_id='s-0'):
    mask = (rng.random((size, size)) < 0.5).astype(np.uint8)
    mask[0, 0] = 1
    support = SupportSample(image=rng.integers(0, 256, (size, size, 3), dtype=np.uint8), mask=mask,
                            class_index=2, class_name='bicycle', id=support_id)
    query = QuerySample(image=rng.integers(0, 256, (size, size, 3), dtype=np.uint8), mask=mask,
                        class_index=2, id='q-0')
    return Episode(supports=[support], query=query, k_original=1, id='ep-0')


def auxiliary(rng, source_id, index, size=8):
    provenance = Provenance(backend='mock', seed=1, kind=GuidanceKind.HED, source_id=source_id, index=index)
    return GeneratedImage(rng.integers(0, 256, (size, size, 3), dtype=np.uint8), provenance)


class ManifestTestCase(SimpleTestCase):
    """Test cases for manifest loading."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / 'manifest.jsonl'

    def tearDown(self):
        self.tmp.cleanup()

    def test_loads_records(self):
        """Test that valid lines become records in file order."""
        write_jsonl(self.path, [
            {'id': 'b', 'image': 'i/b.png', 'mask': 'm/b.png', 'classes': [3], 'sizes': ['small']},
            {'id': 'a', 'image': 'i/a.png', 'mask': 'm/a.png', 'classes': [1, 2], 'names': ['x', 'y']},
        ])
        records = load_manifest(self.path)
        self.assertEqual([r.id for r in records], ['b', 'a'])
        self.assertEqual(records[1].name_of(2), 'y')
        self.assertEqual(records[0].sizes, ('small',))

    def test_duplicate_id(self):
        """Test that a repeated id is rejected."""
        line = {'id': 'a', 'image': 'i/a.png', 'mask': 'm/a.png', 'classes': [1]}
        write_jsonl(self.path, [line, line])
        with self.assertRaises(ManifestError):
            load_manifest(self.path)

    def test_sizes_must_be_parallel(self):
        """Test that sizes must match classes in length."""
        write_jsonl(self.path, [{'id': 'a', 'image': 'i', 'mask': 'm', 'classes': [1, 2], 'sizes': ['small']}])
        with self.assertRaises(ManifestError):
            load_manifest(self.path)

    def test_missing_manifest(self):
        """Test that a missing file is a manifest error."""
        with self.assertRaises(ManifestError):
            load_manifest(self.path)

    def test_size_buckets(self):
        """Test COCO area bucket edges."""
        self.assertEqual(size_bucket(32 ** 2 - 1), 'small')
        self.assertEqual(size_bucket(32 ** 2), 'medium')
        self.assertEqual(size_bucket(96 ** 2), 'large')


class Fss1000ManifestTestCase(SimpleTestCase):
    """Test cases for binary-mask records with FSS-1000 class indices."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.names = [f'class_{i:04d}' for i in range(1000)]
        self.mask = np.zeros((8, 8), dtype=np.uint8)
        self.mask[2:6, 3:7] = 1
        write_png(self.root / 'images' / 'a.png', np.full((8, 8, 3), 90, dtype=np.uint8))
        write_mask_png(self.root / 'masks' / 'a.png', self.mask)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, **line):
        document = {'id': 'a', 'image': 'images/a.png', 'mask': 'masks/a.png', **line}
        write_jsonl(self.root / 'manifest.jsonl', [document])
        return load_manifest(self.root / 'manifest.jsonl')

    def test_test_split_record_loads(self):
        """Test that a record of the first FSS-1000 test class loads as a support and a segmap."""
        split = make_split('fss1000', 0, 'test', self.names)
        self.assertEqual((split.classes[0], split.classes[-1]), (761, 1000))
        [loaded] = self.write(classes=[761], binary=True)
        self.assertTrue(loaded.binary)

        support = load_support(self.root, loaded, 761, split.name_of(761))
        np.testing.assert_array_equal(support.mask, self.mask)
        self.assertEqual(support.class_name, 'class_0760')

        segmap = build_condition(support, GuidanceKind.SEGMAP).condition_image
        self.assertEqual(tuple(segmap[3, 4]), voc_palette(1024)[761])
        self.assertEqual(tuple(segmap[0, 0]), (0, 0, 0))

    def test_binary_flag_survives_rewrite(self):
        """Test that writing a binary record back keeps the flag."""
        records = self.write(classes=[1000], binary=True)
        write_manifest(self.root / 'copy.jsonl', records)
        self.assertEqual(load_manifest(self.root / 'copy.jsonl'), records)

    def test_other_class_is_empty(self):
        """Test that a binary mask has no pixels for a class it does not carry."""
        [loaded] = self.write(classes=[761], binary=True)
        self.assertFalse(class_mask(self.root, loaded, 762).any())

    def test_large_index_needs_binary(self):
        """Test that label-map records cannot name classes past 254."""
        with self.assertRaises(ManifestError):
            self.write(classes=[761])

    def test_binary_holds_one_class(self):
        """Test that a binary record must carry exactly one class."""
        with self.assertRaises(ManifestError):
            self.write(classes=[761, 762], binary=True)


class SamplingTestCase(SimpleTestCase):
    """Test cases for seeded episode sampling."""

    def setUp(self):
        self.split = SplitSpec('synthetic', 0, 'test', [1, 2, 3, 4], ['a', 'b', 'c', 'd'])
        self.pool = synthetic_pool(5)

    def test_supports_and_query_distinct(self):
        """Test that k=1 on a two-image class never reuses the support as query."""
        split = SplitSpec('synthetic', 0, 'test', [1], ['a'])
        pool = synthetic_pool(2, classes=(1,))
        for index in range(50):
            spec = sample_episode_spec(split, pool, 1, seed=3, index=index)
            self.assertNotEqual(spec.support_ids[0], spec.query_id)

    def test_fixed_seed_is_repeatable(self):
        """Test that equal seeds give identical episodes."""
        a = sample_episode_spec(self.split, self.pool, 3, seed=42, index=7)
        b = sample_episode_spec(self.split, self.pool, 3, seed=42, index=7)
        self.assertEqual(a, b)
        self.assertEqual(len(set(a.support_ids) | {a.query_id}), 4)

    def test_same_class_throughout(self):
        """Test that supports and query come from the sampled class."""
        for spec in episode_stream(self.split, self.pool, 2, seed=1, count=30):
            prefix = f'c{spec.class_index}-'
            self.assertTrue(all(i.startswith(prefix) for i in spec.support_ids + (spec.query_id,)))

    def test_class_frequencies_uniform(self):
        """Test that 10,000 episodes hit each class within 3 sigma of uniform."""
        n = 10_000
        counts = Counter(spec.class_index for spec in episode_stream(self.split, self.pool, 1, seed=0, count=n))
        p = 1 / 4
        sigma = math.sqrt(n * p * (1 - p))
        for c in (1, 2, 3, 4):
            self.assertLessEqual(abs(counts[c] - n * p), 3 * sigma)

    def test_small_classes_are_skipped(self):
        """Test that classes without k+1 images are never drawn."""
        pool = synthetic_pool(5, classes=(1,)) + synthetic_pool(2, classes=(2,))
        classes = {s.class_index for s in episode_stream(self.split, pool, 2, seed=5, count=40)}
        self.assertEqual(classes, {1})

    def test_insufficient_samples(self):
        """Test that a split with no eligible class errors."""
        with self.assertRaises(InsufficientSamples):
            sample_episode_spec(self.split, synthetic_pool(2), 5, seed=0)

    def test_dump_round_trips(self):
        """Test that episode dumps reload into equal specs."""
        specs = list(episode_stream(self.split, self.pool, 2, seed=9, count=5))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'episodes.jsonl'
            write_episode_dump(path, specs)
            self.assertEqual(read_episode_dump(path), specs)


class SyntheticEpisodeTestCase(SimpleTestCase):
    """Test cases for loading episodes from the synthetic dataset."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.pool = make_synthetic_dataset(self.root, per_class=4, size=24, seed=3)
        self.split = SplitSpec('synthetic', 0, 'test', [1, 2], synthetic_class_names())

    def tearDown(self):
        self.tmp.cleanup()

    def test_dataset_is_reproducible(self):
        """Test that the same seed writes the same bytes."""
        other = Path(self.tmp.name) / 'again'
        make_synthetic_dataset(other, per_class=4, size=24, seed=3)
        for record in self.pool:
            self.assertEqual((self.root / record.image).read_bytes(), (other / record.image).read_bytes())
        self.assertEqual(load_manifest(other / 'manifest.jsonl'), self.pool)

    def test_loaded_episode(self):
        """Test that loaded episodes carry binary masks of the sampled class."""
        episode = sample_episode(self.split, self.pool, 2, seed=4, root=self.root)
        self.assertEqual(episode.k, 2)
        self.assertEqual(episode.k_original, 2)
        for support in episode.supports:
            self.assertTrue(support.mask.any())
            self.assertTrue(set(np.unique(support.mask)) <= {0, 1})
            self.assertIn(support.class_name, synthetic_class_names())


class ExtendEpisodeTestCase(SimpleTestCase):
    """Test cases for the K to X-shot extension."""

    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.episode = toy_episode(self.rng)

    def test_empty_auxiliaries_is_identity(self):
        """Test that no auxiliaries leaves the episode unchanged."""
        self.assertIs(extend_episode(self.episode, []), self.episode)

    def test_four_auxiliaries_share_the_mask(self):
        """Test that four auxiliaries give K=5 with byte-equal masks."""
        aux = [auxiliary(self.rng, 's-0', k) for k in range(1, 5)]
        extended = extend_episode(self.episode, aux)

        self.assertEqual((extended.k, extended.k_original, extended.n_aux), (5, 1, 4))
        reference = self.episode.supports[0].mask.tobytes()
        self.assertTrue(all(s.mask.tobytes() == reference for s in extended.supports))
        self.assertTrue(all(s.class_name == 'bicycle' for s in extended.auxiliaries))
        self.assertIs(extended.query, self.episode.query)

    def test_seeded_extensions(self):
        """Test 500 random extensions for mask sharing and K = 1 + n."""
        for trial in range(500):
            rng = np.random.default_rng(trial)
            episode = toy_episode(rng, size=6)
            n = int(rng.integers(0, 6))
            extended = extend_episode(episode, [auxiliary(rng, 's-0', k, size=6) for k in range(1, n + 1)])
            self.assertEqual(extended.k, 1 + n)
            for support in extended.auxiliaries:
                self.assertEqual(support.mask.tobytes(), episode.supports[0].mask.tobytes())

    def test_foreign_source_rejected(self):
        """Test that an auxiliary from another support is refused."""
        for trial in range(50):
            rng = np.random.default_rng(trial)
            with self.assertRaises(ProvenanceMismatch):
                extend_episode(toy_episode(rng), [auxiliary(rng, 's-0', 1), auxiliary(rng, f'other-{trial}', 2)])

    def test_size_mismatch(self):
        """Test that an auxiliary of another size is refused."""
        with self.assertRaises(DimensionMismatch):
            extend_episode(self.episode, [auxiliary(self.rng, 's-0', 1, size=9)])

    def test_episode_composition_rules(self):
        """Test that Episode rejects inconsistent counts."""
        support = self.episode.supports[0]
        with self.assertRaises(InvalidEpisode):
            Episode(supports=[support, support], query=self.episode.query, k_original=1)


class MiniCocoTestCase(SimpleTestCase):
    """Test cases for the stratified MiniCOCO builder."""

    def uniform(self):
        return [record(f'{c:02d}-{n:03d}', [c], ['large']) for c in range(1, 11) for n in range(100)]

    def skewed(self):
        # classes 4 and 5 share every other image with class 9
        counts = {1: 7, 2: 14, 3: 25, 4: 100, 5: 333, 6: 4}
        buckets = ('small', 'medium', 'large')
        records = []
        for c, total in counts.items():
            for n in range(total):
                if c in (4, 5) and n % 2 == 0:
                    records.append(record(f'{c:02d}-{n:03d}', [c, 9], [buckets[n % 3], 'small']))
                else:
                    records.append(record(f'{c:02d}-{n:03d}', [c], [buckets[n % 3]]))
        return records

    def pair_counts(self, records):
        return Counter(pair for r in records for pair in set(zip(r.classes, r.sizes)))

    def assert_within_one(self, train, result, ratio=0.10):
        available = self.pair_counts(train)
        sampled = self.pair_counts(result.train)
        for (c, size), n in available.items():
            self.assertLessEqual(abs(sampled[(c, size)] - ratio * n), 1, (c, size))
            self.assertEqual(result.strata[f'{c}/{size}'], {'available': n, 'sampled': sampled[(c, size)]})
        self.assertEqual(len({r.id for r in result.train}), len(result.train))

    def val_for(self, records):
        classes = sorted({c for r in records for c in r.classes})
        return [record(f'v{c:02d}-{n}', [c]) for c in classes for n in range(6)]

    def test_uniform_ten_percent(self):
        """Test that 10 classes of 100 images give exactly 10 per class."""
        train = self.uniform()
        result = build_minicoco(train, [self.val_for(train)], ratio=0.10, seed=0)
        self.assertEqual(Counter(r.classes[0] for r in result.train), {c: 10 for c in range(1, 11)})

    def test_skewed_counting_oracle(self):
        """Test that every (class, size) stratum, co-occurring ones included, keeps round(ratio * n) within 1."""
        train = self.skewed()
        result = build_minicoco(train, [self.val_for(train)], ratio=0.10, seed=3)
        self.assert_within_one(train, result)
        self.assertEqual(self.pair_counts(result.train)[(9, 'small')], 22)

    def test_secondary_class_is_stratified(self):
        """Test that a class seen only next to another one is sampled at the ratio too."""
        train = [record(f'a{n:03d}', [1], ['large']) for n in range(100)]
        train += [record(f'b{n:03d}', [1, 2], ['large', 'small']) for n in range(100)]
        for seed in range(10):
            result = build_minicoco(train, [self.val_for(train)], ratio=0.10, seed=seed)
            self.assert_within_one(train, result)
            self.assertEqual(self.pair_counts(result.train), {(1, 'large'): 20, (2, 'small'): 10})

    def test_seeded(self):
        """Test that equal seeds give identical subsets."""
        train = self.skewed()
        a = build_minicoco(train, [self.val_for(train)], seed=11)
        b = build_minicoco(train, [self.val_for(train)], seed=11)
        self.assertEqual([r.id for r in a.train], [r.id for r in b.train])

    def test_strict_small_stratum(self):
        """Test that strict mode refuses strata that round to zero."""
        train = [record('a', [1]), record('b', [1])]
        with self.assertRaises(StratumError):
            build_minicoco(train, [self.val_for(train)], ratio=0.10, strict=True)

    def test_validation_intersection_and_top_up(self):
        """Test that validation is the intersection plus one pool image for short classes."""
        train = [record(f't{n}', [1]) for n in range(10)]
        first = [record(f'v{n}', [1]) for n in range(5)] + [record('only-first', [1])]
        second = [record(f'v{n}', [1]) for n in range(5)]
        pool = [record('p9', [1]), record('p2', [1]), record('v0', [1])]

        result = build_minicoco(train, [first, second], val_pool=pool, seed=0)

        self.assertEqual([r.id for r in result.val], ['p2', 'v0', 'v1', 'v2', 'v3', 'v4'])
        self.assertEqual(result.topped_up, {1: 'p2'})

    def test_class_without_validation(self):
        """Test that a class missing from validation errors."""
        train = [record(f't{n}', [1]) for n in range(10)] + [record('u', [2])]
        with self.assertRaises(ManifestError):
            build_minicoco(train, [self.val_for([record('x', [1])])])

    def test_reference_sizes_recorded(self):
        """Test that the published subset sizes appear in the summary."""
        train = self.uniform()
        summary = build_minicoco(train, [self.val_for(train)]).summary(0.10, 0)
        self.assertEqual(summary['reference_sizes'], REFERENCE_SIZES)
        self.assertEqual(summary['train_images'], 100)
