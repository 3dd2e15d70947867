"""Command-line experiment runner.

Each subcommand reads an optional JSON config, runs one pipeline and writes
CSV artifacts plus ``summary.json`` into ``--out``. Exit status: 0 when every
configured assertion passes, 1 when one fails, 2 for an invalid config and 3
for an I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from importlib import resources
from typing import Callable, Dict, List, Optional, Tuple

import jsonschema

from .casebook import (
    GluedFunction,
    ThetaMap,
    abs_lagrange_divergence,
    entire_target,
    glued_psi0,
    warped_table,
)
from .discrete_taylor import (
    UPSILON,
    NumericalTaylorSeries,
    bernstein_form,
    numerical_taylor,
    radius_diagnostic,
    representation_residual,
)
from .errors import ConfigError, SupershiftError
from .legendre import (
    ShiftedLegendreBasis,
    coefficient_identity_check,
    identity_scale,
    l2_norm_squared,
    parseval_residual,
    project,
)
from .periodic import FourierSpectrum, decay_certificate, exp_spectrum, multiplier_identity_check, rational_spectrum
from .precision import PrecisionPolicy, decimal_string, default_threads, magnitude, to_fraction
from .sampling import EpsilonFamily, EpsilonSequence, irregular_row, log_eps, power_eps, random_xi, zero_eps
from .supershift import (
    REAL_LINE,
    ExtrapolationDomain,
    judge,
    reflection_residual,
    superoscillation_check,
    tcsp_sweep,
    uniform_grid,
)
from .trigpoly import (
    IDENTITY_LIMIT,
    CertificateKind,
    XiProduct,
    bernstein_trigpoly,
    error_certificate,
    lagrange_trigpoly,
)

EXIT_OK, EXIT_ASSERTION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

DEFAULTS: Dict[str, dict] = {
    "superosc": {
        "family": "bernstein", "N_list": [8, 16, 32, 64], "lambda_list": [3], "x_range": [-5, 5],
        "x_step": "1/2", "eps": {"kind": "zero"}, "seed": 0, "threshold": 1e-3,
        "expect_verdict": "Converging", "check_certificate": None,
    },
    "extrapolate": {
        "target": "cos", "rule": "Bernstein", "N_list": [8, 16, 32, 64], "a_range": [-3, 3],
        "a_prime_range": [-3, 3], "step": "1/4",
        "eps_family": [{"kind": "zero"}, {"kind": "power", "c": 1}, {"kind": "power", "c": 2}],
        "threshold": 1e-3, "expect_verdict": "Converging", "check_reflection": True,
    },
    "taylor": {
        "target": "exp", "b_prime": 0, "M_list": [1, 2, 4], "kappa_max": 16, "kappa_compare": 8,
        "eps": {"kind": "zero"}, "representation_N_list": [4, 8, 12], "expect_radius_decrease": True,
    },
    "legendre-check": {
        "target": "exp", "b_prime": 0, "eps_N": "1/4", "N_list": [2, 4, 8, 10], "R": 2, "nu_max": 16,
    },
    "kantorovich": {
        "rho0": "1/2", "glue": "linear", "a_list": [-2.5, -1.5, 0.7, 2, 3], "N_list": [8, 16, 32, 64],
        "eps": {"kind": "zero"}, "tolerance": 1e-2,
    },
    "divergence": {
        "a_eval": "1/2", "N_list": [41, 81, 121, 161, 201], "expect_verdict": "Diverging", "auto_perturb": True,
    },
    "periodic": {
        "spectrum": {"kind": "exp", "K": 8, "rate": 1},
        "identity_R_list": [3, 5], "identity_N_list": [16, 32], "a_prime_grid": [0, "3/10", "17/10"],
        "R_list": ["5/4", "3/2", 2, 3, 4, 6, 8, 12, 16], "N_list": [2, 4, 6, 8], "chi": 4,
        "expect_positive_Rprime": True,
    },
}

SUBCOMMANDS = tuple(DEFAULTS)
EXACT_SUPPORTED = {"taylor", "legendre-check", "divergence"}


def load_schema() -> dict:
    return json.loads(resources.files("supershift_lab").joinpath("data/config_schema.json").read_text())


def real(x) -> Fraction:
    """Config number to an exact rational; JSON floats are read by their decimal text."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return to_fraction(x)


def eps_sequence(spec: dict, Ns, policy: PrecisionPolicy) -> EpsilonSequence:
    kind = spec["kind"]
    if kind == "zero":
        return zero_eps(Ns)
    if kind == "power":
        return power_eps(real(spec.get("c", 1)), Ns, int(spec.get("p", 1)))
    return log_eps(real(spec.get("c", "1/2")), Ns, policy)


class Assertions:
    def __init__(self) -> None:
        self.items: List[dict] = []

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.items.append({"name": name, "passed": bool(passed), "detail": detail})

    @property
    def ok(self) -> bool:
        return all(a["passed"] for a in self.items)


Artifacts = Dict[str, str]


# -- pipelines ---------------------------------------------------------------


def run_superosc(cfg: dict, policy: PrecisionPolicy, threads: int, exact: bool, checks: Assertions):
    Ns = list(cfg["N_list"])
    lambdas = [real(x) for x in cfg["lambda_list"]]
    xs = uniform_grid(*cfg["x_range"], real(cfg["x_step"]))
    family = cfg["family"]
    if family == "bernstein":
        eps = eps_sequence(cfg["eps"], Ns, policy)
        builder = lambda N, lam: bernstein_trigpoly(N, lam, eps.at(N), policy=policy)
    elif family == "xi_product":
        xi = random_xi(Ns, cfg["seed"])
        builder = lambda N, lam: XiProduct(N, xi.row(N), lam)
    else:
        rows = {N: irregular_row(N, cfg["seed"] + N) for N in Ns}
        builder = lambda N, lam: lagrange_trigpoly(rows[N], lam, policy=policy)
    report = superoscillation_check(builder, IDENTITY_LIMIT, xs, lambdas, Ns, threshold=cfg["threshold"],
                                    policy=policy, threads=threads, rule=family)
    if cfg["expect_verdict"] is not None:
        checks.check("verdict", report.verdict.value == cfg["expect_verdict"],
                     f"{report.verdict.value} (expected {cfg['expect_verdict']})")
    want_cert = cfg["check_certificate"] if cfg["check_certificate"] is not None else family == "lagrange_irregular"
    if want_cert:
        ctx = policy.ctx
        violations = 0
        slack_unit = ctx.ldexp(1, -(policy.mantissa_bits - 16))
        slack = {}
        for _, _, N, lam, x, err in report.records:
            if (N, lam) not in slack:
                slack[(N, lam)] = slack_unit * sum(abs(policy.lift(c)) for c in builder(N, lam).amplitudes)
            bound = error_certificate(CertificateKind.LAGRANGE_FACTORIAL, lam, x, N, policy).bound_value
            violations += err > bound + slack[(N, lam)]
        checks.check("lagrange_certificate", violations == 0, f"{violations} violations")
    return report.summary(policy.mantissa_bits), {"superosc.csv": report.to_csv(policy.mantissa_bits)}


def run_extrapolate(cfg: dict, policy: PrecisionPolicy, threads: int, exact: bool, checks: Assertions):
    Ns = list(cfg["N_list"])
    psi = entire_target(cfg["target"])
    family = EpsilonFamily(tuple(eps_sequence(e, Ns, policy) for e in cfg["eps_family"]))
    dom = ExtrapolationDomain.grid(REAL_LINE, cfg["a_range"], cfg["a_prime_range"], real(cfg["step"]))
    report = tcsp_sweep(psi, dom, Ns, family, cfg["rule"], threshold=cfg["threshold"], policy=policy,
                        threads=threads)
    results = report.summary(policy.mantissa_bits)
    if cfg["expect_verdict"] is not None:
        checks.check("verdict", report.verdict.value == cfg["expect_verdict"],
                     f"{report.verdict.value} (expected {cfg['expect_verdict']})")
    if cfg["check_reflection"]:
        pts = [dom.points[0], dom.points[len(dom.points) // 2], dom.points[-1]]
        N = Ns[-1]
        worst = max(reflection_residual(psi, a, ap, N, m.at(N), policy) for a, ap in pts for m in family.members)
        results["reflection_residual"] = decimal_string(worst, policy.mantissa_bits)
        checks.check("reflection_identity", worst <= policy.half_tolerance, f"max relative gap {float(worst):.3e}")
    return results, {"extrapolate.csv": report.to_csv(policy.mantissa_bits)}


def run_taylor(cfg: dict, policy: PrecisionPolicy, threads: int, exact: bool, checks: Assertions):
    Psi = UPSILON.compose(entire_target(cfg["target"]))
    b = real(cfg["b_prime"])
    kmax, kcmp = cfg["kappa_max"], cfg["kappa_compare"]
    if kcmp > kmax:
        raise ConfigError("kappa_compare must not exceed kappa_max")
    artifacts, results = {}, {"radius": {}}
    for M in cfg["M_list"]:
        Ns = [M * k for k in range(1, kmax + 1)]
        eps = eps_sequence(cfg["eps"], Ns, policy)
        series = numerical_taylor(Psi, b, M, kmax, eps, exact=exact, policy=policy, threads=threads)
        short = NumericalTaylorSeries(M, series.coefficients[: kcmp + 1], b)
        r_big, r_small = radius_diagnostic(series, policy), radius_diagnostic(short, policy)
        results["radius"][str(M)] = {str(kcmp): float(r_small), str(kmax): float(r_big)}
        if cfg["expect_radius_decrease"]:
            checks.check(f"radius_decreases_M{M}", r_big < r_small, f"{float(r_small):.6g} -> {float(r_big):.6g}")
        artifacts[f"taylor_M{M}.csv"] = series.to_csv(policy.mantissa_bits)
    rep_N = list(cfg["representation_N_list"])
    eps = eps_sequence(cfg["eps"], rep_N, policy)
    worst = 0
    for N in rep_N:
        form = bernstein_form(Psi, b, N, eps.at(N), exact=exact, policy=policy)
        res = representation_residual(form)
        if exact:
            passed = res == 0
        else:
            scale = max(magnitude(c, policy) for c in form.coefficients) or 1
            passed = res <= policy.half_tolerance * max(scale, 1)
        worst = max(worst, res)
        checks.check(f"representation_N{N}", passed, f"residual {float(res):.3e}")
    results["representation_residual"] = decimal_string(worst, policy.mantissa_bits)
    return results, artifacts


def run_legendre(cfg: dict, policy: PrecisionPolicy, threads: int, exact: bool, checks: Assertions):
    defect = ShiftedLegendreBasis(cfg["nu_max"]).orthonormality_defect()
    checks.check("orthonormality", defect == 0, f"defect {defect}")
    Psi = UPSILON.compose(entire_target(cfg["target"]))
    b, eps_N, R = real(cfg["b_prime"]), real(cfg["eps_N"]), real(cfg["R"])
    artifacts, results = {}, {"identity_residual": {}, "parseval_residual": {}}
    for N in cfg["N_list"]:
        form = bernstein_form(Psi, b, N, eps_N, exact=exact, policy=policy)
        coeffs = project(form, R, exact=exact, policy=policy)
        res = coefficient_identity_check(form, coeffs, exact=exact, policy=policy)
        par = parseval_residual(form, coeffs, exact=exact, policy=policy)
        if exact:
            ok_id, ok_par = res == 0, par == 0
        else:
            ok_id = res <= policy.half_tolerance * max(identity_scale(form, R, policy), 1)
            ok_par = par <= policy.half_tolerance * max(abs(l2_norm_squared(form, R, policy=policy)), 1)
        checks.check(f"identity_N{N}", ok_id, f"residual {float(res):.3e}")
        checks.check(f"parseval_N{N}", ok_par, f"residual {float(par):.3e}")
        results["identity_residual"][str(N)] = decimal_string(res, policy.mantissa_bits)
        results["parseval_residual"][str(N)] = decimal_string(par, policy.mantissa_bits)
        artifacts[f"legendre_N{N}.csv"] = coeffs.to_csv(policy.mantissa_bits)
    return results, artifacts


GLUE_PAIRS: Dict[str, Tuple[Callable, Callable]] = {
    "linear": (lambda z: z - Fraction(1, 2), lambda z: 2 * (z - Fraction(1, 2))),
    "steep": (lambda z: z - Fraction(1, 2), lambda z: 3 * (z - Fraction(1, 2))),
}


def run_kantorovich(cfg: dict, policy: PrecisionPolicy, threads: int, exact: bool, checks: Assertions):
    rho0 = real(cfg["rho0"])
    G = GluedFunction(*GLUE_PAIRS[cfg["glue"]], rho0=rho0, policy=policy)
    theta = ThetaMap(rho0)
    h = Fraction(1, 2**20)
    left = (glued_psi0(G, 0) - glued_psi0(G, -h)) / h
    right = (glued_psi0(G, h) - glued_psi0(G, 0)) / h
    checks.check("glue_continuity", glued_psi0(G, 0) == G.G_minus(Fraction(1, 2)) == G.G_plus(Fraction(1, 2)))
    checks.check("glue_kink", left != right, f"one-sided slopes {left} and {right}")
    Ns = list(cfg["N_list"])
    eps = eps_sequence(cfg["eps"], Ns, policy)
    artifacts, results = {}, {"errors": {}}
    for i, a in enumerate(cfg["a_list"]):
        table = warped_table(G, theta, real(a), Ns, eps, policy, threads)
        e = table.errors
        results["errors"][str(a)] = {str(N): float(e[N]) for N in Ns}
        checks.check(f"warped_improves_a{i}", e[Ns[-1]] < e[Ns[0]], f"{float(e[Ns[0]]):.3e} -> {float(e[Ns[-1]]):.3e}")
        checks.check(f"warped_tolerance_a{i}", e[Ns[-1]] < cfg["tolerance"], f"{float(e[Ns[-1]]):.3e}")
        artifacts[f"kantorovich_a{i}.csv"] = table.to_csv(policy.mantissa_bits)
    return results, artifacts


def run_divergence(cfg: dict, policy: PrecisionPolicy, threads: int, exact: bool, checks: Assertions):
    table = abs_lagrange_divergence(real(cfg["a_eval"]), list(cfg["N_list"]), auto_perturb=cfg["auto_perturb"],
                                    threads=threads, policy=policy)
    verdict = judge(table.errors)
    if cfg["expect_verdict"] is not None:
        checks.check("verdict", verdict.value == cfg["expect_verdict"],
                     f"{verdict.value} (expected {cfg['expect_verdict']})")
    results = {
        "verdict": verdict.value,
        "errors": {str(N): float(e) for N, e in table.errors.items()},
        "growth_ratio": float(table.growth_ratio()),
        "perturbations": table.notes,
    }
    return results, {"divergence.csv": table.to_csv(policy.mantissa_bits)}


def build_spectrum(spec: dict, policy: PrecisionPolicy) -> FourierSpectrum:
    T = real(spec["T"]) if "T" in spec else None
    kind = spec.get("kind", "exp")
    if kind == "exp":
        return exp_spectrum(spec.get("K", 8), T, real(spec.get("rate", 1)), policy)
    if kind == "rational":
        return rational_spectrum(spec.get("K", 8), T, policy)
    coeffs = {int(k): policy.lift(real(v)) for k, v in spec.get("coefficients", {}).items()}
    return FourierSpectrum(policy.lift(T) if T is not None else 2 * policy.ctx.pi, coeffs)


def run_periodic(cfg: dict, policy: PrecisionPolicy, threads: int, exact: bool, checks: Assertions):
    s = build_spectrum(cfg["spectrum"], policy)
    grid = [real(x) for x in cfg["a_prime_grid"]]
    results = {"identity": []}
    for R in cfg["identity_R_list"]:
        for N in cfg["identity_N_list"]:
            res, scale = multiplier_identity_check(s, real(R), grid, N, policy)
            ok = res <= policy.half_tolerance * max(scale, 1)
            checks.check(f"multiplier_identity_R{R}_N{N}", ok, f"residual {float(res):.3e}, scale {float(scale):.3e}")
            results["identity"].append({"R": str(R), "N": N, "residual": decimal_string(res, policy.mantissa_bits),
                                        "scale": float(scale)})
    cert = decay_certificate(s, [real(R) for R in cfg["R_list"]], list(cfg["N_list"]), real(cfg["chi"]),
                             policy, threads)
    results["implied_Rprime"] = float(cert.implied_Rprime)
    results["certified_R"] = [float(r.R) for r in cert.records if r.certified]
    if cfg["expect_positive_Rprime"]:
        checks.check("positive_Rprime", cert.implied_Rprime > 0, f"R' = {float(cert.implied_Rprime):.6g}")
    return results, {"periodic.csv": cert.to_csv(policy.mantissa_bits)}


PIPELINES = {
    "superosc": run_superosc,
    "extrapolate": run_extrapolate,
    "taylor": run_taylor,
    "legendre-check": run_legendre,
    "kantorovich": run_kantorovich,
    "divergence": run_divergence,
    "periodic": run_periodic,
}


# -- driver ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults apply to omitted keys)")
    common.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    common.add_argument("--precision", type=int, help="mantissa bits (default: config value or 256)")
    common.add_argument("--threads", type=int, help="worker threads (default: available CPUs)")
    common.add_argument("--exact", action="store_true", help="exact rational arithmetic where supported")
    parser = argparse.ArgumentParser(prog="supershift-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the {name} pipeline")
    return parser


def load_config(path: Optional[str], subcommand: str) -> dict:
    """Read and validate a config; ``OSError`` propagates, anything malformed is a ConfigError."""
    raw: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc.msg})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
    schema = load_schema()
    sub_schema = dict(schema["$defs"][subcommand])
    sub_schema["$defs"] = schema["$defs"]
    try:
        jsonschema.validate(raw, sub_schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    cfg = json.loads(json.dumps(DEFAULTS[subcommand]))
    cfg.update(raw)
    return cfg


def config_hash(subcommand: str, cfg: dict, bits: int, exact: bool) -> str:
    blob = json.dumps({"subcommand": subcommand, "config": cfg, "bits": bits, "exact": exact},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_outputs(out: str, artifacts: Artifacts, summary: dict) -> None:
    os.makedirs(out, exist_ok=True)
    for name in sorted(artifacts):
        with open(os.path.join(out, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(artifacts[name])
    with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    name = args.subcommand
    try:
        cfg = load_config(args.config, name)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    bits = args.precision or cfg.pop("precision", None) or 256
    cfg.pop("precision", None)
    threads = args.threads or cfg.pop("threads", None) or default_threads()
    cfg.pop("threads", None)
    exact = bool(args.exact) and name in EXACT_SUPPORTED
    checks = Assertions()
    start = time.perf_counter()
    try:
        policy = PrecisionPolicy(bits)
        results, artifacts = PIPELINES[name](cfg, policy, threads, exact, checks)
    except (SupershiftError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = {
        "subcommand": name,
        "config_hash": config_hash(name, cfg, bits, exact),
        "precision_bits": bits,
        "exact": exact,
        "threads": threads,
        "wall_time_s": round(time.perf_counter() - start, 3),
        "assertions": checks.items,
        "all_passed": checks.ok,
        "results": results,
        "artifacts": sorted(artifacts),
    }
    if args.exact and not exact:
        summary["note"] = f"exact mode is not available for {name}; float mode was used"
    try:
        write_outputs(args.out, artifacts, summary)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    for item in checks.items:
        print(f"{'PASS' if item['passed'] else 'FAIL'} {item['name']} {item['detail']}".rstrip())
    return EXIT_OK if checks.ok else EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
