import logging

from diffss.exceptions import ProvenanceMismatch
from diffss.imaging import check_same_size

from .samples import Episode, SupportSample

logger = logging.getLogger(__name__)


def extend_episode(episode: Episode, auxiliaries) -> Episode:
    """
    Append generated images to the support set. Each auxiliary attaches to
    the original support named by its provenance and reuses that support's
    mask, class index and class name; the query is untouched.
    """
    if not auxiliaries:
        return episode
    originals = {s.id: s for s in episode.originals}
    extra = []
    for aux in auxiliaries:
        source = originals.get(aux.source_id)
        if source is None:
            raise ProvenanceMismatch(
                f'{aux.image_id} was generated from {aux.source_id}, '
                f'which is not an original support of episode {episode.id}'
            )
        check_same_size(aux.image, source.mask, f'auxiliary {aux.image_id} and its support mask')
        extra.append(SupportSample(
            image=aux.image,
            mask=source.mask,
            class_index=source.class_index,
            class_name=source.class_name,
            id=aux.image_id,
        ))
    logger.debug('extended episode %s with %d auxiliaries', episode.id, len(extra))
    return Episode(
        supports=episode.supports + tuple(extra),
        query=episode.query,
        k_original=episode.k_original,
        n_aux=episode.n_aux + len(extra),
        fold=episode.fold,
        class_index=episode.class_index,
        id=episode.id,
    )
