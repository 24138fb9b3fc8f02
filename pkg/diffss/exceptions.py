"""
Pipeline errors.

Every error is a DRF ``APIException`` so API views render it directly, and
carries an ``exit_code`` that management commands hand to ``CommandError``.
"""
from rest_framework import status
from rest_framework.exceptions import APIException


class ExitCode:
    SUCCESS = 0
    CONFIG = 2
    BACKEND = 3
    QUALITY_GATE = 4


class DiffssError(APIException):
    status_code = status.HTTP_400_BAD_REQUEST
    default_detail = 'Pipeline error.'
    default_code = 'pipeline_error'
    exit_code = 1

    def __str__(self):
        return str(self.detail)


class InvalidImage(DiffssError):
    default_detail = 'Image is empty or out of range.'
    default_code = 'invalid_image'


class DimensionMismatch(DiffssError):
    default_detail = 'Image and mask dimensions differ.'
    default_code = 'dimension_mismatch'


class EmptyMask(DiffssError):
    default_detail = 'Mask has no foreground pixels.'
    default_code = 'empty_mask'


class ZeroVector(DiffssError):
    default_detail = 'Vector has zero norm.'
    default_code = 'zero_vector'


class PaletteRangeError(DiffssError):
    default_detail = 'Class index outside palette range.'
    default_code = 'palette_range'


class TemplateError(DiffssError):
    default_detail = 'Prompt template or class name is invalid.'
    default_code = 'template_error'


class ConfigError(DiffssError):
    default_detail = 'Invalid run configuration.'
    default_code = 'config_error'
    exit_code = ExitCode.CONFIG


class BackendUnavailable(DiffssError):
    status_code = status.HTTP_503_SERVICE_UNAVAILABLE
    default_detail = 'Backend service is unreachable.'
    default_code = 'backend_unavailable'
    exit_code = ExitCode.BACKEND


class MalformedResponse(DiffssError):
    status_code = status.HTTP_502_BAD_GATEWAY
    default_detail = 'Backend returned a malformed response.'
    default_code = 'malformed_response'
    exit_code = ExitCode.BACKEND


class CountLimitExceeded(DiffssError):
    default_detail = 'Requested image count exceeds the backend limit.'
    default_code = 'count_limit'


class ProvenanceMismatch(DiffssError):
    default_detail = 'Generated image does not belong to this support sample.'
    default_code = 'provenance_mismatch'


class InvalidEpisode(DiffssError):
    default_detail = 'Episode violates its composition rules.'
    default_code = 'invalid_episode'


class InsufficientSamples(DiffssError):
    default_detail = 'Not enough samples to build an episode.'
    default_code = 'insufficient_samples'


class ManifestError(DiffssError):
    default_detail = 'Dataset manifest is invalid.'
    default_code = 'manifest_error'
    exit_code = ExitCode.CONFIG


class StratumError(DiffssError):
    default_detail = 'Stratum cannot be sampled.'
    default_code = 'stratum_error'


class ModelFailure(DiffssError):
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    default_detail = 'Segmentation model failed.'
    default_code = 'model_failure'

    def __init__(self, detail=None, episode_id=None):
        if episode_id is not None:
            detail = f'episode {episode_id}: {detail or self.default_detail}'
        super().__init__(detail)
        self.episode_id = episode_id


class ReportMismatch(DiffssError):
    default_detail = 'Reports were produced under incompatible configurations.'
    default_code = 'report_mismatch'


class DegenerateInput(DiffssError):
    default_detail = 'Input is degenerate for this computation.'
    default_code = 'degenerate_input'


class QualityGateError(DiffssError):
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    default_detail = 'Run failed its quality gate.'
    default_code = 'quality_gate'
    exit_code = ExitCode.QUALITY_GATE
