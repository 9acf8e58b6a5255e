"""Construction, preparation, powering, and serialization of chi states.

A chi state of power a over a cyclic group of order m puts amplitude
exp(2*pi*i*a*r/m)/sqrt(m) on the basis element g**r. Power 0 is the uniform
superposition. Preparation runs the five-step protocol: superpose exponents,
load powers of g, transform the exponent register again, measure it, and
retry until the observed value is coprime to m; a final division by the
measured value's inverse converts the surviving state to power 1.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ArtifactMismatch, RetryLimitExceeded, UnverifiedChi
from .group import GroupSpec, gcd, mod_inverse, validate_group
from .qstate import (
    ExponentRegister,
    GroupRegister,
    QState,
    RegisterLayout,
    basis_state,
    collapse,
    dump_amplitudes,
    factor_out,
    fidelity,
    marginal_distribution,
    measure,
    parse_amplitudes,
    tensor,
)
from .transforms import div_alpha_apply, power_oracle_apply, qft_apply

__all__ = [
    "FIDELITY_TOL",
    "VERIFY_MAX_ORDER",
    "ChiHandle",
    "PrepStats",
    "chi_power_from",
    "chi_reference",
    "load_chi",
    "prepare_chi",
    "save_chi",
]

FIDELITY_TOL = 1e-9
VERIFY_MAX_ORDER = 64  # structural assertions default on up to this order


def chi_reference(spec: GroupSpec, power: int) -> QState:
    """Reference chi state built directly from its definition."""
    m = spec.order
    amps = np.zeros(m, dtype=np.complex128)
    x = spec.identity
    for r in range(m):
        amps[spec.index_of(x)] = np.exp(2j * np.pi * ((power * r) % m) / m)
        x = spec.mul(x, spec.generator)
    amps /= np.sqrt(m)
    return QState(RegisterLayout((GroupRegister(spec),)), amps)


@dataclass
class ChiHandle:
    """A chi register with its claimed power; reused and mutated across runs."""
    power: int
    state: QState
    verified: bool = False

    @property
    def group(self) -> GroupSpec:
        return self.state.layout.registers[0].group

    def verify(self, tol: float = FIDELITY_TOL) -> float:
        """Fidelity against the reference state; sets the verified flag."""
        fid = fidelity(self.state, chi_reference(self.group, self.power))
        self.verified = fid >= 1.0 - tol
        return fid


@dataclass
class PrepStats:
    """Preparation telemetry: one entry in observed_s per attempt."""
    attempts: int
    observed_s: list[int] = field(default_factory=list)
    success_s: int = 0
    acceptance_probability: float | None = None


def _assert_superposed_structure(spec: GroupSpec, state: QState) -> None:
    """Check that every exponent column holds that power's chi state, scaled."""
    m = spec.order
    grid = state.amplitudes.reshape(m, m)  # [group index, exponent label]
    scale = 1.0 / np.sqrt(m)
    for s in range(m):
        ref = chi_reference(spec, s).amplitudes * scale
        drift = float(np.max(np.abs(grid[:, s] - ref)))
        assert drift <= FIDELITY_TOL, \
            f"pre-measurement column {s} drifted {drift:.3e} from its chi state"


def prepare_chi(spec: GroupSpec, seed=None, mode: str = "sampled",
                verify: bool | None = None,
                max_attempts: int = 10_000) -> tuple[ChiHandle, PrepStats]:
    """Prepare a verified power-1 chi state for the group.

    Sampled mode measures with a seeded generator and retries while the
    observed value shares a factor with the order. Exhaustive mode instead
    reports the exact acceptance probability of the coprimality test and
    collapses deterministically onto the smallest coprime value, so it always
    finishes in one attempt. Returns the handle and the attempt statistics.
    """
    if mode not in ("sampled", "exhaustive"):
        raise ValueError(f"unknown mode {mode!r}")
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    m = spec.order
    check = (m <= VERIFY_MAX_ORDER) if verify is None else verify
    rng = np.random.default_rng(seed)
    layout = RegisterLayout((ExponentRegister(m), GroupRegister(spec)))
    observed: list[int] = []

    acceptance = None
    post = None
    success = -1
    attempts = 0
    for attempts in range(1, max_attempts + 1):
        # round: superpose exponents, load powers, transform again
        state = basis_state(layout, (0, spec.identity))
        state = qft_apply(state, 0, check_unitary=check)
        state = power_oracle_apply(state)
        state = qft_apply(state, 0, check_unitary=check)
        if check:
            _assert_superposed_structure(spec, state)
        if mode == "exhaustive":
            probs = marginal_distribution(state, 0)
            acceptance = float(sum(probs[s] for s in range(m) if gcd(s, m) == 1))
            success = next(s for s in range(m) if gcd(s, m) == 1)
            observed.append(success)
            post = collapse(state, 0, success).post_state
            break
        outcome = measure(state, 0, rng)
        observed.append(outcome.observed)
        if gcd(outcome.observed, m) == 1:
            success = outcome.observed
            post = outcome.post_state
            break
    else:
        raise RetryLimitExceeded(
            f"no coprime measurement within {max_attempts} attempts for order {m}")

    assert gcd(success, m) == 1
    # the measured register is classical now: split it off, then rebuild the
    # pair as (uniform chi, surviving chi) and divide down to power 1
    exp_layout = RegisterLayout((ExponentRegister(m),))
    survivor = factor_out(post, 0, basis_state(exp_layout, (success,)))
    joint = tensor(chi_reference(spec, 0), survivor)
    joint = div_alpha_apply(joint, mod_inverse(success, m))
    chi_state = factor_out(joint, 1, chi_reference(spec, success))

    handle = ChiHandle(power=1, state=chi_state)
    fid = handle.verify()
    assert handle.verified, f"prepared state fidelity {fid} below {1 - FIDELITY_TOL}"
    stats = PrepStats(attempts=attempts, observed_s=observed, success_s=success,
                      acceptance_probability=acceptance)
    return handle, stats


def chi_power_from(spec: GroupSpec, source: ChiHandle, alpha: int,
                   start_power: int = 0) -> ChiHandle:
    """Raise a chi state into a fresh register without consuming the source.

    Puts a chi state of start_power (default: uniform) on a new left register,
    divides it by the source register raised to alpha, and splits the pair
    back apart. The left register comes out at power start_power + alpha *
    source.power and the source register is checked to be unchanged.
    """
    if not source.verified:
        raise UnverifiedChi("source handle must be verified before powering")
    m = spec.order
    new_power = (start_power + alpha * source.power) % m
    joint = tensor(chi_reference(spec, start_power), source.state)
    joint = div_alpha_apply(joint, alpha)
    new_state = factor_out(joint, 1, source.state)
    untouched = factor_out(joint, 0, chi_reference(spec, new_power))
    drift = fidelity(untouched, source.state)
    assert drift >= 1.0 - FIDELITY_TOL, f"source register drifted to fidelity {drift}"
    handle = ChiHandle(power=new_power, state=new_state)
    handle.verify()
    return handle


_HEADER = re.compile(r"^chi m=(\d+) power=(\d+) n=(\d+) g=(\d+)$")


def save_chi(handle: ChiHandle, path) -> None:
    """Write a chi register to a text file: one header line, then amplitudes."""
    spec = handle.group
    if spec.modulus is None:
        raise ValueError("only modulus-backed groups serialize to chi files")
    header = (f"chi m={spec.order} power={handle.power % spec.order} "
              f"n={spec.modulus} g={spec.generator}\n")
    Path(path).write_text(header + dump_amplitudes(handle.state))


def load_chi(path) -> tuple[GroupSpec, ChiHandle]:
    """Read a chi file back; the caller decides whether to verify the handle."""
    text = Path(path).read_text()
    head, _, body = text.partition("\n")
    match = _HEADER.match(head.strip())
    if match is None:
        raise ArtifactMismatch(f"bad chi header: {head!r}")
    m, power, n, g = (int(v) for v in match.groups())
    spec = validate_group(n, g)
    if spec.order != m:
        raise ArtifactMismatch(
            f"header claims order {m}, but {g} has order {spec.order} mod {n}")
    state = parse_amplitudes(body, RegisterLayout((GroupRegister(spec),)))
    return spec, ChiHandle(power=power, state=state, verified=False)
