"""
Few-shot segmentation models behind one contract: ``segment(episode)``
consumes every support of the episode, originals and auxiliaries alike, and
returns a prediction for the query.
"""
import json
import logging
import shlex
import subprocess
import tempfile
import threading
from pathlib import Path

from django.conf import settings

from diffss.exceptions import ConfigError, DegenerateInput, DiffssError, ModelFailure
from diffss.imaging import BinaryMask, ColorImage, read_mask
from diffss.storage import atomic_write_text, write_mask_png, write_png
from episodes.samples import Episode, QuerySample, SupportSample

from .features import extract_features
from .prototypes import PredictedMask, fuse_prototypes, masked_average_pool, predict

logger = logging.getLogger(__name__)


class FewShotSegmenter:
    segmenter_id = 'base'
    # callers serialize access unless the model says otherwise
    thread_safe = False

    def segment(self, episode: Episode) -> PredictedMask:
        raise NotImplementedError

    def segment_image(self, image: ColorImage, support: SupportSample) -> BinaryMask:
        """Segment a single image guided by one support, as a 1-shot episode."""
        query = QuerySample(image=image, mask=support.mask, class_index=support.class_index, id=f'{support.id}:image')
        episode = Episode(supports=[support], query=query, k_original=1, id=query.id)
        return self.segment(episode).mask


class ReferenceSegmenter(FewShotSegmenter):
    """
    Prototype matching: foreground and background prototypes are the fused
    masked averages over all supports (background from each complement mask),
    and query pixels take the label of the closer prototype by cosine.
    """
    segmenter_id = 'reference'
    thread_safe = True

    def __init__(self, extractor=None):
        self.extractor = extractor

    def segment(self, episode: Episode) -> PredictedMask:
        fg, bg = [], []
        for support in episode.supports:
            features = extract_features(support.image, self.extractor)
            fg.append(masked_average_pool(features, support.mask))
            complement = 1 - support.mask
            if complement.any():
                bg.append(masked_average_pool(features, complement))
        if not bg:
            raise DegenerateInput(f'episode {episode.id}: supports have no background pixels')
        query_features = extract_features(episode.query.image, self.extractor)
        return predict(query_features, fuse_prototypes(fg), fuse_prototypes(bg))


class OracleSegmenter(FewShotSegmenter):
    """Returns the ground truth; a fixture for harness and drift checks."""
    segmenter_id = 'oracle'
    thread_safe = True

    def segment(self, episode: Episode) -> PredictedMask:
        return PredictedMask(episode.query.mask)

    def segment_image(self, image: ColorImage, support: SupportSample) -> BinaryMask:
        return support.mask


class SubprocessSegmenter(FewShotSegmenter):
    """
    Adapter for an external model run as a command. Each call writes the
    episode to a scratch directory, runs ``<command> <dir>`` and reads
    ``<dir>/prediction.png``. See docs/fss_adapter.md.
    """
    segmenter_id = 'subprocess'

    def __init__(self, command: str, timeout: float | None = None, thread_safe: bool = False):
        if not command:
            raise ConfigError('subprocess segmenter needs a command')
        self.command = shlex.split(command)
        self.timeout = timeout or settings.DIFFSS['SEGMENTER_TIMEOUT']
        self.thread_safe = thread_safe
        self._lock = threading.Lock()

    def write_episode(self, episode: Episode, directory: Path) -> Path:
        supports = []
        for position, support in enumerate(episode.supports):
            image_path = f'supports/{position}.png'
            mask_path = f'supports/{position}_mask.png'
            write_png(directory / image_path, support.image)
            write_mask_png(directory / mask_path, support.mask)
            supports.append({'id': support.id, 'image': image_path, 'mask': mask_path})
        write_png(directory / 'query.png', episode.query.image)
        document = {
            'id': episode.id,
            'class_index': episode.class_index,
            'k_original': episode.k_original,
            'n_aux': episode.n_aux,
            'supports': supports,
            'query': {'id': episode.query.id, 'image': 'query.png'},
        }
        return atomic_write_text(directory / 'episode.jsonl', json.dumps(document, sort_keys=True) + '\n')

    def _run(self, episode: Episode) -> PredictedMask:
        with tempfile.TemporaryDirectory(prefix='diffss-episode-') as tmp:
            directory = Path(tmp)
            self.write_episode(episode, directory)
            try:
                completed = subprocess.run(
                    [*self.command, str(directory)],
                    capture_output=True, text=True, timeout=self.timeout, check=False,
                )
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise ModelFailure(f'{self.command[0]} did not run: {exc}', episode.id) from exc
            if completed.returncode != 0:
                raise ModelFailure(
                    f'{self.command[0]} exited {completed.returncode}: {completed.stderr.strip()[-500:]}', episode.id
                )
            prediction = directory / 'prediction.png'
            if not prediction.exists():
                raise ModelFailure(f'{self.command[0]} wrote no prediction.png', episode.id)
            mask = read_mask(prediction)
        if mask.shape != episode.query.mask.shape:
            raise ModelFailure(f'prediction {mask.shape} vs query {episode.query.mask.shape}', episode.id)
        return PredictedMask(mask)

    def segment(self, episode: Episode) -> PredictedMask:
        if self.thread_safe:
            return self._run(episode)
        with self._lock:
            return self._run(episode)


SEGMENTERS = {
    'reference': ReferenceSegmenter,
    'oracle': OracleSegmenter,
    'subprocess': SubprocessSegmenter,
}


def make_segmenter(name: str, command: str | None = None) -> FewShotSegmenter:
    if name not in SEGMENTERS:
        raise ConfigError(f'unknown segmenter {name!r}; choose from {sorted(SEGMENTERS)}')
    if name == 'subprocess':
        return SubprocessSegmenter(command)
    return SEGMENTERS[name]()


def segment_episode(episode: Episode, model: FewShotSegmenter) -> PredictedMask:
    """Run ``model`` on ``episode``; any failure comes back as ModelFailure naming the episode."""
    try:
        prediction = model.segment(episode)
    except ModelFailure:
        raise
    except DiffssError as exc:
        raise ModelFailure(str(exc), episode.id) from exc
    except Exception as exc:
        logger.exception('model %s crashed on episode %s', model.segmenter_id, episode.id)
        raise ModelFailure(f'{type(exc).__name__}: {exc}', episode.id) from exc
    if prediction.mask.shape != episode.query.mask.shape:
        raise ModelFailure(
            f'prediction {prediction.mask.shape} vs query {episode.query.mask.shape}', episode.id
        )
    return prediction
