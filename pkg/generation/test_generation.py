"""
Test cases for auxiliary image generation.
Covers the mock backend's determinism and bounds, the request contract of
``generate``, the HTTP client against a stubbed transport and the resumable store.
"""
import base64
import tempfile
from pathlib import Path
from unittest import mock

import numpy as np
import requests
from django.conf import settings
from django.test import SimpleTestCase, TestCase, override_settings

from conditions.controls import build_condition
from conditions.models import GuidanceKind
from diffss.exceptions import (
    BackendUnavailable,
    ConfigError,
    CountLimitExceeded,
    InvalidImage,
    MalformedResponse,
)
from diffss.imaging import encode_png
from episodes.samples import SupportSample

from .backends import HttpDiffusionGenerator
from .images import MAX_SEED, GenerationRequest, Provenance
from .mock import MockGenerator, mock_generate
from .models import GeneratedImageRecord
from .serializers import ProvenanceSerializer
from .service import generate, make_generator
from .store import GeneratedStore


def blob_support(seed=0, size=16, sample_id='s-1'):
    rng = np.random.default_rng(seed)
    image = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
    mask = np.zeros((size, size), dtype=np.uint8)
    mask[4:12, 3:11] = 1
    return SupportSample(image=image, mask=mask, class_index=3, class_name='bird', id=sample_id)


def service_settings(**overrides):
    conf = {**settings.DIFFSS, 'RETRY_ATTEMPTS': 2, 'GENERATOR_URL': 'http://gen.local/run', **overrides}
    return override_settings(DIFFSS=conf)


class MockGenerateTestCase(SimpleTestCase):
    """Test cases for the deterministic mock transform."""

    def setUp(self):
        self.support = blob_support()
        self.condition = build_condition(self.support, GuidanceKind.SCRIBBLE)

    def render(self, seed=0, k=1, **amplitudes):
        return mock_generate(self.condition, self.support.image, self.support.mask, seed, k, **amplitudes)

    def test_same_arguments_same_bytes(self):
        """Test that equal (condition, seed, k) give equal bytes."""
        self.assertEqual(self.render(7, 2).tobytes(), self.render(7, 2).tobytes())

    def test_zero_amplitudes_keep_foreground(self):
        """Test that without jitter or noise the foreground is copied exactly."""
        out = self.render(3, 1, jitter_gain=0.0, jitter_bias=0.0, noise_amplitude=0.0)
        fg = self.support.mask.astype(bool)
        np.testing.assert_array_equal(out[fg], self.support.image[fg])

    def test_background_is_replaced(self):
        """Test that background pixels no longer match the source."""
        out = self.render(3, 1)
        bg = ~self.support.mask.astype(bool)
        self.assertFalse(np.array_equal(out[bg], self.support.image[bg]))

    def test_indices_differ_on_foreground(self):
        """Test that k=1 and k=2 differ on the foreground in nearly every trial."""
        fg = self.support.mask.astype(bool)
        differing = 0
        for trial in range(100):
            support = blob_support(seed=trial)
            condition = build_condition(support, GuidanceKind.HED)
            first = mock_generate(condition, support.image, support.mask, trial, 1)
            second = mock_generate(condition, support.image, support.mask, trial, 2)
            differing += not np.array_equal(first[fg], second[fg])
        self.assertGreaterEqual(differing / 100, 0.99)

    def test_foreground_shift_within_bound(self):
        """Test that the mean foreground shift stays under the configured bound over 1000 seeds."""
        generator = MockGenerator()
        fg = self.support.mask.astype(bool)
        source = self.support.image[fg].astype(np.float64)
        for seed in range(1000):
            out = self.render(seed, 1)[fg].astype(np.float64)
            shift = np.abs(out - source)
            self.assertLessEqual(shift.mean(), generator.intensity_shift_bound)
            self.assertLessEqual(shift.max(), generator.intensity_shift_bound)

    def test_missing_source_image(self):
        """Test that the mock refuses to run without the support image."""
        with self.assertRaises(InvalidImage):
            mock_generate(self.condition, None, self.support.mask, 0, 1)

    def test_negative_amplitude_rejected(self):
        """Test that negative amplitudes are a configuration error."""
        with self.assertRaises(ConfigError):
            self.render(0, 1, noise_amplitude=-1.0)


class GenerateTestCase(SimpleTestCase):
    """Test cases for the generate entry point."""

    def setUp(self):
        self.support = blob_support()
        self.condition = build_condition(self.support, GuidanceKind.SEGMAP)
        self.backend = MockGenerator()

    def test_zero_count_is_empty(self):
        """Test that count 0 produces no images."""
        request = GenerationRequest(self.condition, count=0, seed=1)
        self.assertEqual(generate(request, self.backend, self.support), [])

    def test_count_and_order(self):
        """Test that exactly count images come back with indices 1..count."""
        request = GenerationRequest(self.condition, count=4, seed=11)
        images = generate(request, self.backend, self.support)

        self.assertEqual([img.provenance.index for img in images], [1, 2, 3, 4])
        self.assertEqual(images[0].image_id, 's-1-segmap-1')
        for img in images:
            self.assertEqual(img.image.shape, self.support.image.shape)
            self.assertEqual(img.provenance.backend, 'mock')
            self.assertEqual(img.provenance.prompt, 'a real shot photo of bird')

    def test_repeat_is_byte_identical(self):
        """Test that the same request twice returns identical lists."""
        request = GenerationRequest(self.condition, count=3, seed=5)
        first = generate(request, self.backend, self.support)
        second = generate(request, self.backend, self.support)
        self.assertTrue(all(a.same_bytes(b) for a, b in zip(first, second)))

    def test_count_above_backend_limit(self):
        """Test that asking for more than the backend allows is refused."""
        request = GenerationRequest(self.condition, count=5, seed=0)
        with self.assertRaises(CountLimitExceeded):
            generate(request, MockGenerator(max_count=4), self.support)

    def test_negative_count_and_bad_seed(self):
        """Test that request validation rejects a negative count and seeds outside [0, 2**63 - 1]."""
        with self.assertRaises(ConfigError):
            GenerationRequest(self.condition, count=-1)
        with self.assertRaises(ConfigError):
            GenerationRequest(self.condition, count=1, seed=2 ** 63)
        with self.assertRaises(ConfigError):
            GenerationRequest(self.condition, count=1, seed=-1)

    def test_largest_seed_is_usable(self):
        """Test that the top of the seed range generates and serializes."""
        request = GenerationRequest(self.condition, count=1, seed=MAX_SEED)
        provenance = generate(request, self.backend, self.support)[0].provenance
        self.assertEqual(provenance.seed, 2 ** 63 - 1)
        serializer = ProvenanceSerializer(data=ProvenanceSerializer(provenance).data)
        self.assertTrue(serializer.is_valid(), serializer.errors)

    def test_prompt_override(self):
        """Test that an explicit prompt replaces the condition prompt."""
        request = GenerationRequest(self.condition, count=1, prompt='a sketch of bird')
        self.assertEqual(request.prompt, 'a sketch of bird')

    def test_unknown_backend(self):
        """Test that the registry names unknown backends."""
        with self.assertRaises(ConfigError):
            make_generator('stable-diffusion')

    def test_provenance_round_trips(self):
        """Test that provenance survives serialization."""
        request = GenerationRequest(self.condition, count=2, seed=9, params={'steps': 20})
        provenance = generate(request, self.backend, self.support)[1].provenance

        data = ProvenanceSerializer(provenance).data
        serializer = ProvenanceSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        restored = serializer.save()

        self.assertEqual(restored, provenance)
        self.assertEqual(restored.params, {'steps': 20})
        self.assertEqual(data['image_id'], 's-1-segmap-2')

    def test_request_is_logged_with_backend_settings(self):
        """Test that the request log carries the backend description and every param."""
        request = GenerationRequest(self.condition, count=1, seed=3, params={'steps': 20, 'eta': 0.5})
        with self.assertLogs('generation.service', level='INFO') as logs:
            generate(request, self.backend, self.support)
        output = '\n'.join(logs.output)
        self.assertIn("'backend': 'mock'", output)
        self.assertIn("'noise_amplitude'", output)
        self.assertIn("'eta': 0.5", output)
        self.assertIn("uninterpreted sampler settings ['eta']", output)


class HttpDiffusionGeneratorTestCase(SimpleTestCase):
    """Test cases for the diffusion service client."""

    def setUp(self):
        self.support = blob_support()
        self.condition = build_condition(self.support, GuidanceKind.HED)

    def response(self, payload, status_code=200):
        resp = mock.Mock(status_code=status_code)
        resp.json.return_value = payload
        return resp

    def encoded(self, shape):
        return base64.b64encode(encode_png(np.full(shape, 90, dtype=np.uint8))).decode('ascii')

    @service_settings()
    def test_request_document_and_decoding(self):
        """Test that the wire document carries every field and images decode in order."""
        payload = {'images': [self.encoded((16, 16, 3)), self.encoded((16, 16, 3))]}
        request = GenerationRequest(self.condition, count=2, seed=4, params={'guidance_scale': 9.0})

        with mock.patch.object(requests.Session, 'post', return_value=self.response(payload)) as post:
            images = generate(request, HttpDiffusionGenerator())

        sent = post.call_args.kwargs['json']
        self.assertEqual(set(sent), {'condition', 'kind', 'prompt', 'count', 'seed', 'params'})
        self.assertEqual(sent['kind'], 'hed')
        self.assertEqual(sent['count'], 2)
        self.assertEqual(len(images), 2)
        self.assertEqual(images[1].provenance.backend, 'http')

    @service_settings()
    def test_other_sizes_are_resized(self):
        """Test that images of another size are resized to the condition size."""
        payload = {'images': [self.encoded((32, 24, 3))]}
        request = GenerationRequest(self.condition, count=1)

        with mock.patch.object(requests.Session, 'post', return_value=self.response(payload)):
            images = generate(request, HttpDiffusionGenerator())

        self.assertEqual(images[0].image.shape, (16, 16, 3))

    @service_settings()
    def test_wrong_image_count(self):
        """Test that a short response is malformed."""
        payload = {'images': [self.encoded((16, 16, 3))]}
        request = GenerationRequest(self.condition, count=2)

        with mock.patch.object(requests.Session, 'post', return_value=self.response(payload)):
            with self.assertRaises(MalformedResponse):
                generate(request, HttpDiffusionGenerator())

    @service_settings()
    def test_unreachable(self):
        """Test that a dead service surfaces as BackendUnavailable."""
        request = GenerationRequest(self.condition, count=1)
        with mock.patch('tenacity.nap.time.sleep'), \
                mock.patch.object(requests.Session, 'post', side_effect=requests.ConnectionError('down')):
            with self.assertRaises(BackendUnavailable):
                generate(request, HttpDiffusionGenerator())

    @service_settings(GENERATOR_URL='')
    def test_missing_url(self):
        """Test that no configured URL means the backend is unavailable."""
        with self.assertRaises(BackendUnavailable):
            HttpDiffusionGenerator()


class GeneratedStoreTestCase(TestCase):
    """Test cases for the resumable generated-image store."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name) / 'generated'
        self.support = blob_support()
        condition = build_condition(self.support, GuidanceKind.SCRIBBLE)
        self.images = generate(GenerationRequest(condition, count=3, seed=2), MockGenerator(), self.support)

    def tearDown(self):
        self.tmp.cleanup()

    def test_reopened_store_lists_images(self):
        """Test that a flushed store reloads with identical images."""
        store = GeneratedStore(self.root)
        for image in self.images:
            store.add(image)
        store.flush()

        reopened = GeneratedStore(self.root)
        self.assertEqual(len(reopened), 3)
        self.assertIn('s-1-scribble-2', reopened)
        self.assertNotIn('s-1-scribble-4', reopened)
        loaded = reopened.images(source_id='s-1')
        self.assertTrue(all(a.same_bytes(b) for a, b in zip(loaded, self.images)))

    def test_resume_drops_missing_files(self):
        """Test that records whose PNG vanished are dropped on reload."""
        store = GeneratedStore(self.root)
        for image in self.images:
            store.add(image)
        store.flush()
        (self.root / 'scribble' / 's-1-scribble-3.png').unlink()

        reopened = GeneratedStore(self.root)
        self.assertEqual(len(reopened), 2)
        self.assertNotIn('s-1-scribble-3', reopened)

    def test_flush_is_byte_stable(self):
        """Test that adding in another order writes the same provenance file."""
        first = GeneratedStore(self.root)
        for image in self.images:
            first.add(image)
        first.flush()
        expected = first.provenance_path.read_bytes()

        other_root = Path(self.tmp.name) / 'other'
        second = GeneratedStore(other_root)
        for image in reversed(self.images):
            second.add(image)
        second.flush()
        self.assertEqual(second.provenance_path.read_bytes(), expected)

    def test_register_upserts_rows(self):
        """Test that registering twice keeps one row per image."""
        store = GeneratedStore(self.root)
        for image in self.images:
            store.add(image)
        store.register()
        store.register()

        self.assertEqual(GeneratedImageRecord.objects.count(), 3)
        self.assertEqual(GeneratedImageRecord.objects.first().image_id, 's-1-scribble-1')

    def test_provenance_type(self):
        """Test that loaded images carry Provenance values."""
        store = GeneratedStore(self.root)
        store.add(self.images[0])
        self.assertIsInstance(store.load('s-1-scribble-1').provenance, Provenance)
