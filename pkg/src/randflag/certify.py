"""Spectral certificates for vanishing cohomology and property (T).

Both certifiers look at the links of codimension-two faces.  The criterion is
sound but not complete: ``certified`` guarantees vanishing, ``not-certified``
says nothing.  Floating-point gaps must clear the threshold by
:data:`MARGIN` so rounding can only make the certifier more conservative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .complex import Face, FlagSkeleton, build_skeleton, is_pure
from .graph import Graph, common_mask, component_count, iter_bits
from .homology import BettiVector, betti
from .spectral import lambda2

__all__ = [
    "MARGIN",
    "LinkFailure",
    "VanishingCertificate",
    "PropertyTCertificate",
    "PipelineResult",
    "check_links",
    "garland_certify",
    "zuk_certify",
    "vanishing_pipeline",
]

MARGIN = 1e-7

DISCONNECTED = "disconnected"
ISOLATED = "isolated-vertex"
SMALL_GAP = "gap<=threshold"


@dataclass(frozen=True)
class LinkFailure:
    face: Face
    reason: str
    lambda2: float | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"face": list(self.face), "reason": self.reason}
        if self.lambda2 is not None:
            out["lambda2"] = self.lambda2
        return out


@dataclass(frozen=True)
class VanishingCertificate:
    D: int
    pure: bool
    links_checked: int
    min_gap: float | None
    threshold: float
    failures: tuple[LinkFailure, ...] = field(default=())

    CERTIFIED = "certified"

    @property
    def certified(self) -> bool:
        return self.pure and not self.failures

    @property
    def verdict(self) -> str:
        return self.CERTIFIED if self.certified else "not-certified"

    def to_json(self) -> dict[str, Any]:
        return {
            "D": self.D,
            "pure": self.pure,
            "threshold": self.threshold,
            "min_gap": self.min_gap,
            "links_checked": self.links_checked,
            "verdict": self.verdict,
            "failures": [f.to_json() for f in self.failures],
        }


@dataclass(frozen=True)
class PropertyTCertificate(VanishingCertificate):
    CERTIFIED = "has-T-certified"


def check_links(sk: FlagSkeleton, D: int, threshold: float) -> tuple[int, float | None, list[LinkFailure]]:
    """Inspect the link of every ``(D-2)``-face; return count, min gap, failures."""
    g = sk.source
    failures = []
    min_gap = None
    faces = sk.faces[D - 2]
    for face in faces:
        labels = list(iter_bits(common_mask(g, face)))
        link = g.induced(labels)
        if not labels:
            # Empty link: purity has already failed.
            failures.append(LinkFailure(face, DISCONNECTED))
            continue
        if any(r == 0 for r in link.rows):
            failures.append(LinkFailure(face, ISOLATED))
            continue
        if component_count(link) != 1:
            failures.append(LinkFailure(face, DISCONNECTED))
            continue
        gap = lambda2(link)
        if min_gap is None or gap < min_gap:
            min_gap = gap
        if gap <= threshold + MARGIN:
            failures.append(LinkFailure(face, SMALL_GAP, gap))
    return len(faces), min_gap, failures


def garland_certify(sk: FlagSkeleton, D: int) -> VanishingCertificate:
    """Certify ``H^{D-1}(X; Q) = 0`` from the ``D``-skeleton.

    Requires purity in dimension ``D`` and, for every ``(D-2)``-face, a
    connected link whose spectral gap exceeds ``1 - 1/D``.
    """
    if D < 2:
        raise ValueError(f"certifier dimension must be at least 2, got {D}")
    if sk.cap < D:
        raise ValueError(f"skeleton cap {sk.cap} below certifier dimension {D}")
    threshold = 1.0 - 1.0 / D
    pure = is_pure(sk, D)
    checked, min_gap, failures = check_links(sk, D, threshold)
    return VanishingCertificate(D, pure, checked, min_gap, threshold, tuple(failures))


def zuk_certify(sk: FlagSkeleton) -> PropertyTCertificate:
    """Certify property (T) for the fundamental group: vertex links with gap > 1/2."""
    if sk.cap < 2:
        raise ValueError(f"skeleton cap {sk.cap} below 2")
    pure = is_pure(sk, 2)
    checked, min_gap, failures = check_links(sk, 2, 0.5)
    return PropertyTCertificate(2, pure, checked, min_gap, 0.5, tuple(failures))


@dataclass(frozen=True)
class PipelineResult:
    certificate: VanishingCertificate
    betti: BettiVector | None = None

    @property
    def betti_k(self) -> int | None:
        if self.betti is None:
            return None
        return self.betti.betti[self.certificate.D - 1]

    def to_json(self) -> dict[str, Any]:
        out = {"certificate": self.certificate.to_json()}
        if self.betti is not None:
            out["betti_crosscheck"] = self.betti.to_json()
        return out


def vanishing_pipeline(g: Graph, k: int, audit: bool = False, audit_method: str = "exact") -> PipelineResult:
    """Build the ``(k+1)``-skeleton, certify ``H^k = 0``, optionally audit by rank."""
    if k < 1:
        raise ValueError(f"degree must be at least 1, got {k}")
    sk = build_skeleton(g, k + 1)
    cert = garland_certify(sk, k + 1)
    b = betti(sk, audit_method, max_degree=k) if audit else None
    return PipelineResult(cert, b)
