import base64
import logging
import threading

import jsonschema
import requests
from tenacity import (
    RetryError,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from .exceptions import BackendUnavailable, MalformedResponse
from .imaging import decode_png, encode_png

logger = logging.getLogger(__name__)

TRANSIENT_ERRORS = (requests.ConnectionError, requests.Timeout)


def b64_png(array) -> str:
    return base64.b64encode(encode_png(array)).decode('ascii')


def png_from_b64(text: str, mode: str = 'RGB'):
    try:
        return decode_png(base64.b64decode(text, validate=True), mode)
    except Exception as exc:
        raise MalformedResponse(f'undecodable image payload: {exc}') from exc


class ServiceClient:
    """
    JSON-over-HTTP client with retries. One ``requests.Session`` per thread,
    so a single client may serve concurrent callers.
    """

    def __init__(self, url: str, timeout: float = 120.0, attempts: int = 3, response_schema: dict | None = None):
        if not url:
            raise BackendUnavailable('no service URL configured')
        self.url = url
        self.timeout = timeout
        self.attempts = attempts
        self.response_schema = response_schema
        self._local = threading.local()

    @property
    def session(self) -> requests.Session:
        session = getattr(self._local, 'session', None)
        if session is None:
            session = self._local.session = requests.Session()
        return session

    def _post_once(self, payload: dict) -> requests.Response:
        response = self.session.post(self.url, json=payload, timeout=self.timeout)
        if response.status_code >= 500:
            # retried like a dropped connection
            raise requests.ConnectionError(f'server error {response.status_code}')
        return response

    def post(self, payload: dict) -> dict:
        retrying = Retrying(
            reraise=False,
            stop=stop_after_attempt(self.attempts),
            wait=wait_exponential(multiplier=1, min=1, max=16),
            retry=retry_if_exception_type(TRANSIENT_ERRORS),
            before_sleep=lambda state: logger.warning(
                'retrying url=%s attempt=%s error=%s', self.url, state.attempt_number, state.outcome.exception()
            ),
        )
        try:
            response = retrying(self._post_once, payload)
        except RetryError as exc:
            raise BackendUnavailable(f'{self.url} unreachable after {self.attempts} attempts') from exc
        if response.status_code >= 400:
            raise MalformedResponse(f'{self.url} answered {response.status_code}')
        try:
            document = response.json()
        except ValueError as exc:
            raise MalformedResponse(f'{self.url} answered with non-JSON body') from exc
        if self.response_schema is not None:
            try:
                jsonschema.validate(document, self.response_schema)
            except jsonschema.ValidationError as exc:
                raise MalformedResponse(f'{self.url} response rejected: {exc.message}') from exc
        return document
