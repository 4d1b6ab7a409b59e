"""
Analysis reports

JSON-ready report builders for the analyze, compose and complement commands.
Complex numbers are written as [re, im] pairs and angles in radians. Every
residual carries the tolerance it was tested against; a residual above it
aborts the report with CrossCheckError.
"""
import json
import sys
from enum import Enum
from typing import Any, Dict, List, Optional

import aiofiles
import numpy as np

from src.logger.logger import Logger
from src.qubit_channels.channel_spec import ChannelSpec
from src.qubit_channels.charfn import char_of
from src.qubit_channels.errors import CrossCheckError, DomainError
from src.qubit_channels.gaussian import (
    CanonicalParams,
    DegradabilityVerdict,
    canonical_to_green,
    complementary_green,
    complementary_kraus,
    complementary_params,
    complementary_substitution_residual,
    degradability_classify,
    gaussian_cp_check,
    intermediate_kraus,
    params_to_lambdas,
    unitary_equivalence_search,
    verify_verdict,
)
from src.qubit_channels.green import (
    GaussianParams,
    GreenFn,
    apply_green,
    compose_gaussian,
    compose_green,
    detect_gaussian,
    green_from_kraus,
    green_from_kraus_dual,
)
from src.qubit_channels.oracle import (
    PSD_TOLERANCE,
    KrausSet,
    apply_channel,
    choi,
    complementary_from_kraus,
    compose_kraus,
    cp_check,
    tT_from_kraus,
)
from src.qubit_channels.settings import Settings

logger = Logger(__name__)

Report = Dict[str, Any]

UNITARY_SEARCH_RESTARTS: int = 2
UNITARY_SEARCH_MAXITER: int = 400

_PLUS = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
_PLUS_I = np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex)
PROBE_STATES: List[np.ndarray] = [
    np.diag([1.0, 0.0]).astype(complex),
    np.diag([0.0, 1.0]).astype(complex),
    _PLUS,
    _PLUS_I,
    np.eye(2, dtype=complex) / 2,
]


def encode(value: Any) -> Any:
    """
    Converts numpy and complex values into JSON-ready structures.
    """
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, np.ndarray):
        return encode(value.tolist())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def gated(check: str, value: float, tolerance: float) -> Dict[str, float]:
    """
    Residual entry {"value", "tolerance"}.

    :raises CrossCheckError: If value exceeds tolerance.
    """
    value = float(value)
    if not value <= tolerance:
        logger.error("Cross-check failed", check=check, residual=f"{value:.3e}", tolerance=tolerance)
        raise CrossCheckError(f"{check} residual {value:.3e} exceeds {tolerance:.1e}", check, value, tolerance)
    return {"value": value, "tolerance": tolerance}


def _gaussian_entry(params: Optional[GaussianParams]) -> Optional[Dict[str, Any]]:
    if params is None:
        return None
    return {"a": complex(params.a), "b": complex(params.b), "c": float(params.c)}


def channel_section(kraus: KrausSet, G: GreenFn, tolerance: float) -> Report:
    """
    Affine form, Gaussian detection, CP verdict and oracle cross-checks of one
    channel given by its Kraus set and kernel.
    """
    affine = tT_from_kraus(kraus)
    psd, min_eigenvalue = cp_check(choi(kraus))
    detected = detect_gaussian(G)

    cp: Report = {
        "choi_psd": psd,
        "min_choi_eigenvalue": {"value": min_eigenvalue, "tolerance": PSD_TOLERANCE},
        "gaussian_condition": None,
    }
    if detected is not None:
        try:
            l1, l2, t3 = detected.to_affine()
        except DomainError:
            logger.debug("Gaussian kernel has complex parameters; skipping the closed-form CP test")
        else:
            holds = gaussian_cp_check(l1, l2, t3)
            if holds != psd:
                raise CrossCheckError(
                    "Gaussian CP condition disagrees with the Choi spectrum", "cp_condition", abs(min_eigenvalue), PSD_TOLERANCE
                )
            cp["gaussian_condition"] = {"lambda1": l1, "lambda2": l2, "t3": t3, "holds": holds}

    action = max(
        apply_green(G, char_of(rho)).max_abs_difference(char_of(apply_channel(kraus, rho))) for rho in PROBE_STATES
    )
    return {
        "affine": {"t": affine.t, "T": affine.T},
        "gaussian": _gaussian_entry(detected),
        "cp": cp,
        "cross_checks": {
            "kernel_vs_kraus": gated("kernel_vs_kraus", G.max_abs_difference(green_from_kraus(kraus)), tolerance),
            "kernel_vs_dual": gated("kernel_vs_dual", G.max_abs_difference(green_from_kraus_dual(kraus)), tolerance),
            "trace_preservation": gated("trace_preservation", G.trace_preservation_residual(), tolerance),
            "green_vs_channel_action": gated("green_vs_channel_action", action, tolerance),
        },
    }


def _params_entry(p: CanonicalParams) -> Report:
    return {"theta": p.theta, "phi": p.phi, "q": p.q}


def verdict_section(verdict: DegradabilityVerdict, p: CanonicalParams) -> Report:
    """
    Degradability verdict with its witness and oracle certificate.
    """
    section: Report = {
        "kind": verdict.kind,
        "method": verdict.method,
        "residual": gated(f"degradability.{verdict.kind.value}", verdict.residual, verdict.tolerance),
        "witness": None,
        "oracle_residual": None,
    }
    if verdict.witness is not None:
        w = verdict.witness
        psd, min_eigenvalue = cp_check(choi(intermediate_kraus(verdict, p)))
        section["witness"] = {
            "theta": w.theta,
            "phi": w.phi,
            "cos2theta": w.cos2theta,
            "cos2phi": w.cos2phi,
            "cptp": psd,
        }
        section["oracle_residual"] = gated("degradation_oracle", verify_verdict(verdict, p), verdict.tolerance)
    return section


def unitary_search_section(kraus: KrausSet, settings: Settings) -> Report:
    """
    Unitary-equivalence diagnostic for a channel without a Gaussian kernel.

    :param kraus: Kraus operators of the channel.
    :param settings: Effective settings; the search is seeded from them.
    :return: Report section with the mismatch and best rotation angles.
    """
    result = unitary_equivalence_search(
        kraus, seed=settings.seed, restarts=UNITARY_SEARCH_RESTARTS, maxiter=UNITARY_SEARCH_MAXITER
    )
    return {
        "mismatch": result.mismatch,
        "gaussian_after_rotation": result.gaussian,
        "input_angles": result.input_angles,
        "output_angles": result.output_angles,
        "restarts": result.restarts,
        "note": "numerical diagnostic; a nonzero mismatch does not exclude unitary equivalence",
    }


def identity_section(p: CanonicalParams, settings: Settings) -> Optional[Report]:
    """
    Literal check that the complementary kernel is the canonical kernel at the
    substituted angles, with the unitary-equivalence search as fallback.
    """
    target = complementary_params(p)
    if target is None:
        return None
    residual = complementary_substitution_residual(p)
    section: Report = {"params": _params_entry(target), "fallback": None}
    if residual <= settings.tolerance:
        section["residual"] = {"value": residual, "tolerance": settings.tolerance}
        return section
    logger.warning("Complementary substitution identity failed literally", residual=f"{residual:.3e}")
    fallback = unitary_search_section(complementary_kraus(p), settings)
    section["residual"] = {"value": residual, "tolerance": settings.tolerance}
    section["fallback"] = fallback
    gated("complementary_unitary_equivalence", fallback["mismatch"], settings.tolerance)
    return section


def canonical_section(p: CanonicalParams, settings: Settings) -> Report:
    """
    Canonical parameters, lambdas, degradability verdict and the
    complementary-substitution identity of a canonical channel.
    """
    l1, l2, l3, t3 = params_to_lambdas(p)
    verdict = degradability_classify(p)
    logger.info("Classified channel", kind=verdict.kind.value, residual=f"{verdict.residual:.3e}")
    return {
        **_params_entry(p),
        "lambdas": [l1, l2, l3],
        "t3": t3,
        "degradability": verdict_section(verdict, p),
        "complementary_identity": identity_section(p, settings),
    }


def kernel_of(spec: ChannelSpec) -> GreenFn:
    """Kernel of a spec; canonical specs use the cached closed form."""
    if spec.is_canonical:
        return canonical_to_green(spec.canonical)
    return green_from_kraus(spec.kraus)


def analyze_report(spec: ChannelSpec, settings: Settings) -> Report:
    """
    Full analysis of one channel.

    :param spec: Parsed channel spec.
    :param settings: Tolerance and seed.
    :return: The report.
    :raises CrossCheckError: If an oracle cross-check fails.
    :raises ClassificationError: If a degradability witness fails.
    """
    report: Report = {"command": "analyze", "input": spec.document}
    report.update(channel_section(spec.kraus, kernel_of(spec), settings.tolerance))
    report["canonical"] = canonical_section(spec.canonical, settings) if spec.is_canonical else None
    return report


def compose_report(first: ChannelSpec, second: ChannelSpec, settings: Settings) -> Report:
    """
    Report of second o first, computed by Grassmann convolution and checked
    against Kraus composition.
    """
    G_first, G_second = kernel_of(first), kernel_of(second)
    G = compose_green(G_first, G_second)
    kraus = compose_kraus(second.kraus, first.kraus)

    report: Report = {"command": "compose", "input": {"first": first.document, "second": second.document}}
    report.update(channel_section(kraus, G, settings.tolerance))

    p_first, p_second = detect_gaussian(G_first), detect_gaussian(G_second)
    composition: Report = {
        "first_gaussian": _gaussian_entry(p_first),
        "second_gaussian": _gaussian_entry(p_second),
        "semigroup": None,
    }
    if p_first is not None and p_second is not None:
        predicted = compose_gaussian(p_first, p_second)
        detected = detect_gaussian(G)
        if detected is None:
            raise CrossCheckError("Composition of Gaussian kernels is not Gaussian", "gaussian_semigroup", float("inf"), settings.tolerance)
        composition["semigroup"] = {
            **_gaussian_entry(predicted),
            "residual": gated("gaussian_semigroup", predicted.max_abs_difference(detected), settings.tolerance),
        }
    report["composition"] = composition
    return report


def complement_report(spec: ChannelSpec, settings: Settings) -> Report:
    """
    Report of the (weak) complementary channel.

    Canonical specs use the physical dilation; Kraus and (t, T) specs use the
    Stinespring complementary, which needs Kraus rank <= 2.

    :raises ChannelValidationError: If a non-canonical channel needs more than
        a qubit environment.
    """
    report: Report = {"command": "complement", "input": spec.document}
    if not spec.is_canonical:
        kraus = complementary_from_kraus(spec.kraus)
        report.update(channel_section(kraus, green_from_kraus(kraus), settings.tolerance))
        report["complementary"] = None
        return report

    p = spec.canonical
    kraus = complementary_kraus(p)
    report.update(channel_section(kraus, complementary_green(p), settings.tolerance))
    target = complementary_params(p)
    if target is None:
        report["complementary"] = {
            "canonical": None,
            "unitary_equivalence": unitary_search_section(kraus, settings),
        }
        return report

    verdict = degradability_classify(target)
    logger.info("Classified complementary channel", kind=verdict.kind.value)
    report["complementary"] = {
        "canonical": _params_entry(target),
        "identity": identity_section(p, settings),
        "degradability": verdict_section(verdict, target),
    }
    return report


def render_json(report: Report) -> str:
    return json.dumps(encode(report), indent=2) + "\n"


def render_text(report: Report) -> str:
    """
    Flat ``key: value`` listing, nested keys joined with dots.
    """
    lines: List[str] = []

    def walk(prefix: str, value: Any) -> None:
        if isinstance(value, dict) and value:
            for key, item in value.items():
                walk(f"{prefix}.{key}" if prefix else key, item)
        else:
            lines.append(f"{prefix}: {json.dumps(value)}")

    walk("", encode(report))
    return "\n".join(lines) + "\n"


def render(report: Report, output_format: str) -> str:
    """
    Renders a report in the requested format.

    :param report: Report dictionary.
    :param output_format: "json" or "text".
    :return: Rendered text ending in a newline.
    """
    if output_format == "text":
        return render_text(report)
    return render_json(report)


async def write_output(text: str, output_path: Optional[str] = None) -> None:
    """
    Writes rendered output to a file, or to stdout when no path is given.
    """
    if output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    async with aiofiles.open(output_path, mode="w") as f:
        await f.write(text)
    logger.info("Report written", path=output_path)
