"""HTTP adapter for viewpoint classifiers served elsewhere.

Request::

    POST <endpoint>
    {"text": ..., "intervention": ..., "condition": ..., "labels": ["effective", "inconclusive", "ineffective"]}

Reply::

    {"scores": {"effective": 0.7, "inconclusive": 0.2, "ineffective": 0.1}}

Scores need only be non-negative with a positive sum; they are renormalized.
No retries: a failed call raises.
"""

from __future__ import annotations

import math

import requests

from .corpus import VIEWPOINTS, InterventionCondition
from .viewpoint import ViewpointDistribution, classify

ENDPOINT_ENV = "RELIABLE_SNIPPETS_ENDPOINT"


class RemoteClassifierError(RuntimeError):
    pass


class RemoteConnectionError(RemoteClassifierError):
    pass


class RemoteStatusError(RemoteClassifierError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"classifier server returned HTTP {status}: {body[:200]}")
        self.status = status


class MalformedReplyError(RemoteClassifierError):
    pass


class InvalidScoresError(RemoteClassifierError):
    pass


def request_payload(text: str, ic: InterventionCondition) -> dict:
    return {
        "text": text,
        "intervention": ic.intervention,
        "condition": ic.condition,
        "labels": list(VIEWPOINTS),
    }


def parse_reply(body) -> ViewpointDistribution:
    scores = body.get("scores") if isinstance(body, dict) else None
    if not isinstance(scores, dict) or any(v not in scores for v in VIEWPOINTS):
        raise MalformedReplyError("malformed classifier reply: expected scores for " + ", ".join(VIEWPOINTS))
    if len(scores) != len(VIEWPOINTS):
        raise InvalidScoresError(f"expected {len(VIEWPOINTS)} scores, got {len(scores)}: {sorted(scores)}")
    raw = []
    for v in VIEWPOINTS:
        x = scores[v]
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InvalidScoresError(f"score for {v!r} is not a number: {x!r}")
        x = float(x)
        if math.isnan(x) or math.isinf(x) or x < 0:
            raise InvalidScoresError(f"score for {v!r} must be finite and non-negative, got {x!r}")
        raw.append(x)
    if math.fsum(raw) <= 0:
        raise InvalidScoresError("scores sum to zero")
    return ViewpointDistribution.normalized(raw)


class RemoteClassifier:
    def __init__(self, endpoint: str, timeout: float = 30.0, session: requests.Session | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.session = session or requests.Session()
        self.identity = f"remote:{endpoint}"

    def classify(self, text: str, ic: InterventionCondition) -> ViewpointDistribution:
        try:
            resp = self.session.post(self.endpoint, json=request_payload(text, ic), timeout=self.timeout)
        except requests.RequestException as exc:
            raise RemoteConnectionError(f"cannot reach classifier at {self.endpoint}: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            raise RemoteStatusError(resp.status_code, resp.text)
        try:
            body = resp.json()
        except ValueError:
            raise MalformedReplyError("malformed classifier reply: body is not JSON") from None
        return parse_reply(body)


def remote_classify(endpoint: str, text: str, ic: InterventionCondition, timeout: float = 30.0) -> ViewpointDistribution:
    return classify(RemoteClassifier(endpoint, timeout), text, ic)
