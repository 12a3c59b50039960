"""Monte-Carlo drivers: SNR sweeps, convergence traces and duality checks.

Trial ``t`` always uses channel seed ``base_seed + t``, shared by every scheme
and every SNR point, so scheme comparisons are paired. Trials run
sequentially in index order, which keeps floating-point aggregation and the
CSV output byte-for-byte reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .baselines import fully_digital_capacity, identity_covariance_rate
from .channel import sample_channel
from .duality import DualityReport, mac_to_bc, verify_duality
from .errors import ConfigError, InvalidInputError
from .factorization import factor, quantize_phases, rate_with_factors
from .optimizer import SolveOptions, SolveTrace, solve
from .rates import SystemDims

SCHEMES = ("proposed", "identity_cov", "fully_digital")
#: SNR floor standing in for P = 0.
MIN_SNR_DB = -60.0
CSV_HEADER = ("scheme", "snr_db", "mean_sum_rate", "std_err", "n_trials")


@dataclass(frozen=True)
class Scenario:
    dims: SystemDims
    L: int = 15
    snr_grid_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    n_trials: int = 100
    base_seed: int = 0
    schemes: tuple[str, ...] = SCHEMES
    factorization: dict | None = None
    options: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db must not be empty")
        if self.n_trials < 0:
            raise ConfigError("n_trials must be nonnegative")
        if self.L < 1:
            raise ConfigError("L must be >= 1")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError(f"unknown scheme(s) {unknown}; choose from {list(SCHEMES)}")
        if self.factorization is not None:
            extra = set(self.factorization) - {"n_rf", "n_rf_r", "bits"}
            if extra:
                raise ConfigError(f"unknown factorization keys {sorted(extra)}")

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        try:
            dims_cfg = d.pop("dims")
            dims = SystemDims(**dims_cfg)
            opts = SolveOptions(**d.pop("options", {}))
            if "snr_grid_db" in d:
                d["snr_grid_db"] = tuple(float(x) for x in d["snr_grid_db"])
            if "schemes" in d:
                d["schemes"] = tuple(d["schemes"])
            return cls(dims=dims, options=opts, **d)
        except ConfigError:
            raise
        except (KeyError, TypeError, InvalidInputError) as exc:
            raise ConfigError(f"bad scenario config: {exc}") from exc

    @classmethod
    def from_file(cls, path) -> "Scenario":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["dims"] = asdict(self.dims)
        out["options"] = asdict(self.options)
        return out


@dataclass(frozen=True)
class CurveRecord:
    scheme: str
    snr_db: float
    mean_sum_rate: float
    std_err: float
    n_trials: int


def snr_to_power(snr_db: float) -> float:
    return 10.0 ** (max(float(snr_db), MIN_SNR_DB) / 10.0)


def trial_channel(scenario: Scenario, trial: int):
    d = scenario.dims
    return sample_channel(d.K, d.N, d.M, scenario.L, scenario.base_seed + trial)


def _proposed_and_factored(H, scenario: Scenario, P: float) -> dict[str, float]:
    sol = solve(H, scenario.dims, P, scenario.options, check_duality=False)
    out = {"proposed": sol.trace.outer_objective[-1]}
    fz = scenario.factorization
    if fz is not None:
        n_rf = fz.get("n_rf", scenario.dims.n_rf_t)
        n_rf_r = fz.get("n_rf_r", scenario.dims.n_rf_r)
        fV = factor(sol.V, n_rf)
        fW = [factor(w, n_rf_r) for w in sol.W]
        bits = fz.get("bits")
        if bits is not None:
            fV = quantize_phases(fV, bits, sol.V)
            fW = [quantize_phases(f, bits, w) for f, w in zip(fW, sol.W)]
        out["proposed_factored"] = rate_with_factors(H, fV, fW, sol.Q)
    return out


def trial_rates(H, scenario: Scenario, P: float) -> dict[str, float]:
    """Sum rate of every configured scheme on one channel realization."""
    rates: dict[str, float] = {}
    if "proposed" in scenario.schemes:
        rates.update(_proposed_and_factored(H, scenario, P))
    if "identity_cov" in scenario.schemes:
        rates["identity_cov"] = identity_covariance_rate(H, scenario.dims, P, scenario.options).sum_rate
    if "fully_digital" in scenario.schemes:
        rates["fully_digital"] = fully_digital_capacity(H, P, "mac_sum_capacity").sum_rate
    return rates


def sweep_samples(scenario: Scenario) -> dict[str, np.ndarray]:
    """Per-trial rates, ``{scheme: array (n_snr, n_trials)}``."""
    n_snr = len(scenario.snr_grid_db)
    samples: dict[str, np.ndarray] = {}
    for t in range(scenario.n_trials):
        H = trial_channel(scenario, t)
        for i, snr in enumerate(scenario.snr_grid_db):
            for name, r in trial_rates(H, scenario, snr_to_power(snr)).items():
                samples.setdefault(name, np.zeros((n_snr, scenario.n_trials)))[i, t] = r
    return samples


def summarize(samples: dict[str, np.ndarray], snr_grid_db) -> list[CurveRecord]:
    records = []
    for name, arr in samples.items():
        n = arr.shape[1]
        for i, snr in enumerate(snr_grid_db):
            row = arr[i]
            se = float(np.std(row, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            records.append(CurveRecord(name, float(snr), float(np.mean(row)), se, n))
    return records


def run_sweep(scenario: Scenario) -> list[CurveRecord]:
    """Mean sum rate and standard error per scheme and SNR point."""
    return summarize(sweep_samples(scenario), scenario.snr_grid_db)


def run_convergence(scenario: Scenario, snr_db: float) -> list[SolveTrace]:
    P = snr_to_power(snr_db)
    return [solve(trial_channel(scenario, t), scenario.dims, P, scenario.options, check_duality=False).trace
            for t in range(scenario.n_trials)]


def run_duality_check(scenario: Scenario, snr_db: float) -> list[DualityReport]:
    P = snr_to_power(snr_db)
    reports = []
    for t in range(scenario.n_trials):
        H = trial_channel(scenario, t)
        sol = solve(H, scenario.dims, P, scenario.options, check_duality=False)
        D = mac_to_bc(H, sol.V, sol.W, sol.Q)
        reports.append(verify_duality(H, sol.V, sol.W, sol.Q, D))
    return reports


def read_overlay(path) -> list[CurveRecord]:
    """Externally supplied curve: CSV with header ``snr_db,sum_rate``."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"snr_db", "sum_rate"} <= set(reader.fieldnames):
                raise ConfigError(f"overlay {path} needs columns snr_db,sum_rate")
            rows = [(float(r["snr_db"]), float(r["sum_rate"])) for r in reader]
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read overlay {path}: {exc}") from exc
    return [CurveRecord(path.stem, s, r, 0.0, 0) for s, r in rows]


def scale_record(rec: CurveRecord, factor_: float) -> CurveRecord:
    return CurveRecord(rec.scheme, rec.snr_db, rec.mean_sum_rate * factor_, rec.std_err * factor_, rec.n_trials)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.scheme, repr(r.snr_db), repr(r.mean_sum_rate), repr(r.std_err), r.n_trials])
    return buf.getvalue()


def records_to_json(records, extra: dict | None = None) -> str:
    payload = {"records": [asdict(r) for r in records]}
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2)
