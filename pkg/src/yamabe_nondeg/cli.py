"""Command line entry point: verification campaigns with JSON or CSV reports.

    yamabe-nondeg check-condition --n 4..48
    yamabe-nondeg spectrum --n 4 --k 16 --asymptotics
    yamabe-nondeg verify-integrals --n 4..10
    yamabe-nondeg bubble --n 4 --k 8,16,32 --q 3 --emit-grid grid.csv
    yamabe-nondeg all --jobs 4 --out report.json

Settings come from flags, then from the JSON file given by --config, then
from the built-in defaults of each subcommand. Exit status: 0 when every
check passes, 1 when a check fails, 2 for configuration errors and 3 when a
numerical error (overflow, quadrature failure) was recorded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bubble, condition, interaction, modes, quad
from .errors import DomainError, YamabeCheckError
from .report import PLUMBING, Record, VerificationReport, check, info
from .series import DEFAULT_TOL, GKernel

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SUBCOMMANDS = ("check-condition", "spectrum", "verify-integrals", "bubble", "all")

DEFAULTS = {
    "check-condition": {"n": list(range(4, 49)), "k": []},
    "spectrum": {"n": list(range(4, 11)), "k": [16, 32, 64]},
    "verify-integrals": {"n": list(range(4, 11)), "k": []},
    "bubble": {"n": [4], "k": [8, 16, 32]},
}

COMMON = {
    "tol": DEFAULT_TOL,
    "format": "json",
    "out": None,
    "jobs": 1,
    "grid": 4096,
    "asymptotics": False,
    "q": 3.0,
    "kelvin_samples": 1000,
    "emit_grid": None,
    "timings": False,
    "nodes": 8,
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: list
    k: list
    tol: float = DEFAULT_TOL
    format: str = "json"
    out: str | None = None
    jobs: int = 1
    grid: int = 4096
    asymptotics: bool = False
    q: float = 3.0
    kelvin_samples: int = 1000
    emit_grid: str | None = None
    timings: bool = False
    nodes: int = 8
    # per-subcommand n/k when running "all" without explicit values
    plan: dict = field(default_factory=dict)

    def validate(self):
        for n in self.n:
            if n < 4:
                raise ConfigError(f"n={n} is out of the supported range (n >= 4)")
        for k in self.k:
            if k < 2:
                raise ConfigError(f"k={k} is out of the supported range (k >= 2)")
        if not self.tol > 0:
            raise ConfigError("tolerances must be positive")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if self.grid < 16:
            raise ConfigError("--grid must be at least 16")
        if self.kelvin_samples < 1 or self.nodes < 2:
            raise ConfigError("sample counts must be positive")

    def public(self) -> dict:
        """The settings that identify a campaign (output location and timing excluded)."""
        d = asdict(self)
        for key in ("out", "timings", "plan", "jobs"):
            d.pop(key)
        return d


def parse_int_list(text) -> list:
    """'4', '4,5,8' or '4..48' (inclusive range); lists may mix both forms."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        out = []
        for item in text:
            out.extend(parse_int_list(item))
        return out
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..")
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ConfigError(f"empty range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise ConfigError(f"cannot parse integer list {text!r}") from exc
    if not out:
        raise ConfigError(f"empty integer list {text!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yamabe-nondeg", description="Numerical checks for bubble-tower nondegeneracy.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", help="dimension(s): 4, 4,5,6 or 4..48")
    common.add_argument("--k", help="bubble count(s): 16 or 8,16,32")
    common.add_argument("--tol", type=float, help="series summation tolerance")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("--config", help="JSON file with settings (flags take precedence)")
    common.add_argument("--timings", action="store_const", const=True, help="add runtime_ms to every record")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check-condition", parents=[common], help="the inequality on g for each n")
    p.add_argument("--grid", type=int, help="uniform grid size on (0, pi)")
    p = sub.add_parser("spectrum", parents=[common], help="mode coefficients and ell_m signs")
    p.add_argument("--asymptotics", action="store_const", const=True, help="also fit the large-k order of the mid-range coefficients")
    sub.add_parser("verify-integrals", parents=[common], help="closed-form bubble integrals")
    p = sub.add_parser("bubble", parents=[common], help="U_* symmetries, error field and norms")
    p.add_argument("--q", type=float, help="Lebesgue exponent of the weighted error norm, n/2 < q < n")
    p.add_argument("--kelvin-samples", type=int, dest="kelvin_samples", help="random points for the symmetry checks")
    p.add_argument("--emit-grid", dest="emit_grid", help="CSV file for U_* samples on the (x1, x2) plane")
    p.add_argument("--nodes", type=int, help="Gauss-Legendre nodes per panel for the norm")
    p = sub.add_parser("all", parents=[common], help="every campaign")
    p.add_argument("--grid", type=int, help="uniform grid size on (0, pi)")
    p.add_argument("--asymptotics", action="store_const", const=True, help="also fit the large-k order of the mid-range coefficients")
    p.add_argument("--q", type=float, help="Lebesgue exponent of the weighted error norm, n/2 < q < n")
    p.add_argument("--kelvin-samples", type=int, dest="kelvin_samples", help="random points for the symmetry checks")
    p.add_argument("--nodes", type=int, help="Gauss-Legendre nodes per panel for the norm")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file over the defaults."""
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        file_cfg = {key.replace("-", "_"): v for key, v in file_cfg.items()}
        unknown = set(file_cfg) - set(COMMON) - {"n", "k"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    flags = {key: v for key, v in vars(args).items() if v is not None and key not in ("command", "config")}
    merged = dict(COMMON)
    merged.update({key: v for key, v in file_cfg.items() if key in COMMON})
    merged.update({key: v for key, v in flags.items() if key in COMMON})
    cmd = args.command
    n_src = flags.get("n", file_cfg.get("n"))
    k_src = flags.get("k", file_cfg.get("k"))
    plan = {}
    for name in DEFAULTS if cmd == "all" else (cmd,):
        plan[name] = {
            "n": parse_int_list(n_src) if n_src is not None else list(DEFAULTS[name]["n"]),
            "k": parse_int_list(k_src) if k_src is not None else list(DEFAULTS[name]["k"]),
        }
    all_n = sorted({n for v in plan.values() for n in v["n"]})
    all_k = sorted({k for v in plan.values() for k in v["k"]})
    try:
        cfg = RunConfig(
            command=cmd,
            n=all_n,
            k=all_k,
            tol=float(merged["tol"]),
            format=str(merged["format"]),
            out=merged["out"],
            jobs=int(merged["jobs"]),
            grid=int(merged["grid"]),
            asymptotics=bool(merged["asymptotics"]),
            q=float(merged["q"]),
            kelvin_samples=int(merged["kelvin_samples"]),
            emit_grid=merged["emit_grid"],
            timings=bool(merged["timings"]),
            nodes=int(merged["nodes"]),
            plan=plan,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid setting: {exc}") from exc
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- tasks
#
# A task is (function name, args); every task returns a list of record
# dicts. Tasks are module-level so that a process pool can pickle them.


def _f(x) -> float:
    return float(x)


def _error_record(rid: str, anchor: str, exc: Exception) -> dict:
    return Record(rid, anchor, "fail", {"error": str(exc), "numerical_error": True}).to_dict()


def task_condition(n: int, grid: int, tol: float) -> list:
    rep = condition.check_condition(n, grid, tol)
    rec = check(
        f"condition/n={n}",
        "nondegeneracy inequality g'' < (n-2)/(n-1) g'^2/g on (0, pi)",
        rep.holds,
        {
            "n": n,
            "holds": rep.holds,
            "min_margin": rep.min_margin,
            "argmin_x": rep.argmin_x,
            "zero_ratio": rep.endpoint_zero_ratio,
            "pi_lhs": rep.endpoint_pi_lhs,
        },
        0.0,
    )
    return [rec.to_dict()]


def task_condition_n4(tol: float) -> list:
    rep = condition.reduced_n4_report()
    # g(2 pi - x) = g(x), so t in [0, 1/2] covers the whole period
    t = 0.5 * np.arange(10_000) / 9_999.0
    gk = GKernel(4, tol)
    gap = float(np.max(np.abs(gk.g(2.0 * math.pi * t) * 3.0 / math.pi**4 - t * t * (1.0 - t) ** 2)))
    return [
        check(
            "condition/n=4/closed-form",
            "dimension-four kernel g(2 pi t) = (pi^4/3) t^2 (1-t)^2",
            gap <= 1e-10,
            {"max_abs_gap": gap, "points": 10_000},
            1e-10,
        ).to_dict(),
        check(
            "condition/n=4/reduced-inequality",
            "dimension-four polynomial form of the inequality",
            condition.reduced_n4_check(),
            {
                "holds": rep.holds,
                "agrees_with_series": rep.implied_by_series,
                "max_normalised_gap": rep.max_normalised_gap,
                "min_margin": rep.min_margin,
                "holds_with_1_plus_t": rep.holds_printed_variant,
            },
            1e-9,
        ).to_dict(),
    ]


def task_spectrum(n: int, k: int) -> list:
    rid = f"spectrum/n={n},k={k}"
    anchor = "ell_m < 0 for m = 2..k-2"
    try:
        cfg = interaction.Configuration.build(n, k)
        table = interaction.coefficient_table(cfg)
        scan = modes.ell_scan(cfg, table)
    except YamabeCheckError as exc:
        return [_error_record(rid, anchor, exc)]
    ell = np.array([e.ell for e in scan.entries])
    mirror = bool(np.all(ell[1:] == ell[1:][::-1]))
    regular = ell[2 : k - 1]
    out = [
        check(
            rid,
            anchor,
            scan.ok and ell[0] == 0.0 and mirror,
            {
                "n": n,
                "k": k,
                "mu": cfg.mu,
                "violations": list(scan.violations),
                "ell_0": _f(ell[0]),
                "max_regular_ell": _f(np.max(regular)) if regular.size else None,
                "mirror_symmetric": mirror,
                "case2_ratio": _f(abs(table.fb[1]) / max(abs(table.fbar[1]), abs(table.abar[1]))),
            },
            0.0,
        ).to_dict()
    ]
    for e in scan.entries:
        m = e.m
        c = table.mode(m)
        out.append(
            info(
                f"{rid}/m={m}",
                "leading-order mode coefficients",
                {
                    "n": n,
                    "k": k,
                    "m": m,
                    "abar": c.abar,
                    "fbar_plus_bbar": c.fb,
                    "gbar": c.gbar,
                    "cbar": c.cbar,
                    "ell": e.ell,
                    "case": e.case_tag,
                    "sign": e.sign,
                },
            ).to_dict()
        )
    return out


def task_asymptotics(n: int, ks: tuple) -> list:
    rid = f"spectrum/asymptotics/n={n}"
    anchor = "mid-range coefficients against g, g', g''"
    try:
        fit = interaction.asymptotic_fit(n, ks)
    except YamabeCheckError as exc:
        return [_error_record(rid, anchor, exc)]
    expected, tol = -1.0, 0.3
    single = {key: fit.slopes[key] for key in ("a", "g", "c")}
    ok = all(abs(s - expected) <= tol for s in single.values())
    values = {"n": n, "ks": list(fit.ks), "expected_order": expected}
    for key in ("a", "g", "c"):
        values[f"order_{key}"] = fit.slopes[key]
        values[f"dev_{key}"] = list(fit.deviations[key])
    two = {"n": n, "ks": list(fit.ks)}
    for key in ("a2", "g2", "c2"):
        two[f"order_{key}"] = fit.slopes[key]
        two[f"dev_{key}"] = list(fit.deviations[key])
    return [
        check(rid, anchor, ok, values, tol).to_dict(),
        info(rid + "/two-sided", "same deviations against twice the g-expressions", two).to_dict(),
    ]


BETA_PAIRS = tuple((q, al) for q in (1.5, 2.0, 3.0, 4.5, 6.0) for al in (-0.75, 0.0, 0.5, 1.2) if q - abs(al) > 0)


def task_beta() -> list:
    worst = 0.0
    for q_exp, alpha in BETA_PAIRS:
        num = quad.beta_integral(q_exp, alpha)
        ref = quad.beta_closed_form(q_exp, alpha)
        worst = max(worst, abs(num - ref) / ref)
    return [
        check(
            "integrals/beta",
            "beta integral against its Gamma-function form",
            worst <= 1e-10,
            {"pairs": len(BETA_PAIRS), "max_relative_gap": worst},
            1e-10,
        ).to_dict()
    ]


def task_integrals(n: int) -> list:
    pre = f"integrals/n={n}"
    out = []
    try:
        z = quad.z_mass_identities(n)
        xi = interaction.xi_value(n)
        mom = quad.bubble_moments(n)
    except YamabeCheckError as exc:
        return [_error_record(pre, "bubble integral identities", exc)]
    out.append(
        check(
            pre + "/z0-mass-closed-form",
            "int U^{p-1} Z_0^2 = 2^{(n-4)/2} n (n-2)^2 Gamma(n/2)^2 / Gamma(n+2)",
            z.mass_closed_form_gap <= 1e-8,
            {"quadrature": z.mass_z0, "closed_form": z.mass_closed_form, "relative_gap": z.mass_closed_form_gap},
            1e-8,
        ).to_dict()
    )
    mass_rel = z.mass_gap / abs(z.mass_z0)
    out.append(
        check(
            pre + "/z0-z1-mass",
            "int U^{p-1} Z_0^2 = int U^{p-1} Z_1^2",
            mass_rel <= 1e-10,
            {"z0": z.mass_z0, "z1": z.mass_z1, "relative_gap": mass_rel},
            1e-10,
        ).to_dict()
    )
    out.append(
        check(
            pre + "/linear-z0",
            "int U^{p-1} Z_0 = -(n-2)/2 (-int y_1 U^{p-1} Z_1)",
            z.linear_rel_gap <= 1e-10,
            {"lhs": z.linear_lhs, "rhs": z.linear_rhs, "relative_gap": z.linear_rel_gap},
            1e-10,
        ).to_dict()
    )
    out.append(
        check(
            pre + "/xi",
            "Xi by quadrature and in closed form",
            xi.relative_gap <= 1e-8,
            {"closed_form": xi.value, "quadrature": xi.quadrature_value, "relative_gap": xi.relative_gap},
            1e-8,
        ).to_dict()
    )
    ratio_ref = (0.5 * n) / (0.5 * n + 1.0)
    ratio_gap = abs(mom.ratio - ratio_ref) / ratio_ref
    out.append(
        check(
            pre + "/moment-ratio",
            "int |x|^2 (1+|x|^2)^{-(n+2)} over int (1+|x|^2)^{-(n+2)} = (n/2)/(n/2+1)",
            ratio_gap <= 1e-10,
            {"ratio": mom.ratio, "expected": ratio_ref, "relative_gap": ratio_gap, "space0": mom.space0, "space2": mom.space2},
            1e-10,
        ).to_dict()
    )
    xi_vec = np.zeros(n)
    xi_vec[0] = math.sqrt(0.99)
    for tag, mu, point in (("off-centre", 0.1, xi_vec), ("centred", 1.0, np.zeros(n))):
        try:
            kl = quad.kelvin_lemma_check(n, mu, point)
        except YamabeCheckError as exc:
            out.append(_error_record(f"{pre}/kelvin-lemma/{tag}", "dilation-translation identity", exc))
            continue
        out.append(
            check(
                f"{pre}/kelvin-lemma/{tag}",
                "mu int d_mu U_mu(x - xi) h = xi . int grad U_mu(x - xi) h for Kelvin-weighted h",
                kl.relative_gap <= 1e-6,
                {"mu": mu, "xi_norm": float(np.linalg.norm(point)), "lhs": kl.lhs, "rhs": kl.rhs, "relative_gap": kl.relative_gap},
                1e-6,
            ).to_dict()
        )
    return out


def task_bubble(n: int, k: int, kelvin_samples: int) -> list:
    pre = f"bubble/n={n},k={k}"
    ens = bubble.BubbleEnsemble.standard(n, k)
    out = []
    sym = bubble.symmetry_deviations(ens, kelvin_samples)
    out.append(
        check(
            pre + "/symmetry",
            "U_* invariant under rotation by 2 pi/k, reflections x_j -> -x_j (j >= 2)",
            sym.rotation <= 1e-12 and sym.evenness <= 1e-12,
            {"rotation": sym.rotation, "evenness": sym.evenness, "samples": sym.samples},
            1e-12,
        ).to_dict()
    )
    out.append(
        check(
            pre + "/kelvin",
            "U_*(x) = |x|^{2-n} U_*(x/|x|^2)",
            sym.kelvin <= 1e-10,
            {"max_relative": sym.kelvin, "samples": sym.samples},
            1e-10,
        ).to_dict()
    )
    out.append(
        check(
            pre + "/error-kelvin",
            "E(x) = |x|^{-n-2} E(x/|x|^2)",
            sym.error_kelvin <= 1e-9,
            {"max_relative": sym.error_kelvin, "samples": sym.samples},
            1e-9,
        ).to_dict()
    )
    agree = bubble.error_fd_agreement(ens)
    out.append(
        check(
            pre + "/error-fd",
            "E = Delta U_* + f(U_*) in closed form against finite differences",
            agree.max_relative <= 1e-6,
            {"max_relative": agree.max_relative, "samples": agree.samples},
            1e-6,
        ).to_dict()
    )
    kf = bubble.kernel_fields(ens)
    x = bubble.sample_points(n, 200, seed=3)
    z0 = kf.z(0)(x)
    dec = kf.Z(0)(x) - sum(kf.Z_l(0, l)(x) + kf.Z_l(1, l)(x) for l in range(1, k + 1))
    scale = np.abs(kf.Z(0)(x)) + sum(np.abs(kf.Z_l(0, l)(x)) + np.abs(kf.Z_l(1, l)(x)) for l in range(1, k + 1))
    dev = float(np.max(np.abs(z0 - dec) / scale))
    out.append(
        check(
            pre + "/z0-decomposition",
            "z_0 = Z_0 - sum_l (Z_{0,l} + Z_{1,l})",
            dev <= 1e-12,
            {"max_relative": dev},
            1e-12,
        ).to_dict()
    )
    if k >= 3:
        tay = bubble.taylor_order_check(ens)
        for fit in tay.fits:
            out.append(
                check(
                    f"{pre}/taylor/{fit.name}",
                    "remainder order of the truncated expansion in mu",
                    abs(fit.order - fit.expected) <= tay.tolerance,
                    {"order": fit.order, "expected": fit.expected, "mus": list(fit.mus), "remainders": list(fit.remainders)},
                    tay.tolerance,
                ).to_dict()
            )
        out.append(
            info(
                f"{pre}/taylor/extras",
                "expansion prefactors",
                {"literal_prefactor_order": tay.literal_prefactor_order, "z0_leading_ratio": tay.leading_ratio},
            ).to_dict()
        )
    return out


def task_single_bubble(n: int) -> list:
    ens = bubble.BubbleEnsemble.single(n)
    kf = bubble.kernel_fields(ens)
    x = bubble.sample_points(n, 50, seed=5)
    worst = 0.0
    for alpha in range(n + 1):
        res, scale = bubble.linearized_residual(ens, kf.Z(alpha), x)
        worst = max(worst, float(np.max(np.abs(res) / scale)))
    err = float(np.max(np.abs(bubble.error_eval(ens, x))))
    rot = float(np.max(np.abs(kf.z(n + 1)(x))))
    return [
        check(
            f"bubble/n={n}/single/kernel",
            "Delta Z_alpha + p gamma U^{p-1} Z_alpha = 0, alpha = 0..n",
            worst <= 1e-6,
            {"max_relative_residual": worst},
            1e-6,
        ).to_dict(),
        check(
            f"bubble/n={n}/single/exact",
            "U is an exact solution and is rotation invariant",
            err == 0.0 and rot <= 1e-14,
            {"max_abs_error": err, "max_abs_rotation_field": rot},
            0.0,
        ).to_dict(),
    ]


def task_norm_decay(n: int, ks: tuple, q: float, nodes: int) -> list:
    rid = f"bubble/n={n}/error-norm-decay"
    anchor = "||E||_** <= C k^{1-n/q}"
    try:
        fit = bubble.error_norm_decay(n, ks, q, nodes)
    except YamabeCheckError as exc:
        return [_error_record(rid, anchor, exc)]
    return [
        check(
            rid,
            anchor,
            abs(fit.slope - fit.expected) <= 0.3,
            {"q": q, "ks": list(fit.ks), "norms": list(fit.norms), "slope": fit.slope, "expected": fit.expected},
            0.3,
        ).to_dict()
    ]


TASKS = {
    "condition": task_condition,
    "condition_n4": task_condition_n4,
    "spectrum": task_spectrum,
    "asymptotics": task_asymptotics,
    "beta": task_beta,
    "integrals": task_integrals,
    "bubble": task_bubble,
    "single_bubble": task_single_bubble,
    "norm_decay": task_norm_decay,
}


def _run_task(task):
    name, args = task
    start = time.perf_counter()
    try:
        recs = TASKS[name](*args)
    except YamabeCheckError as exc:
        recs = [_error_record(f"{name}/{'/'.join(map(str, args))}", PLUMBING, exc)]
    elapsed = 1e3 * (time.perf_counter() - start) / max(len(recs), 1)
    return recs, elapsed


def plan_tasks(cfg: RunConfig) -> list:
    tasks = []
    p = cfg.plan
    if "check-condition" in p:
        ns = p["check-condition"]["n"]
        tasks += [("condition", (n, cfg.grid, cfg.tol)) for n in ns]
        if 4 in ns:
            tasks.append(("condition_n4", (cfg.tol,)))
    if "spectrum" in p:
        ns, ks = p["spectrum"]["n"], p["spectrum"]["k"]
        if not ks:
            raise ConfigError("spectrum needs at least one k")
        tasks += [("spectrum", (n, k)) for n in ns for k in ks]
        if cfg.asymptotics:
            aks = tuple(ks) if len(ks) >= 2 else tuple(ks[0] * 2**j for j in range(4))
            tasks += [("asymptotics", (n, aks)) for n in ns]
    if "verify-integrals" in p:
        tasks.append(("beta", ()))
        tasks += [("integrals", (n,)) for n in p["verify-integrals"]["n"]]
    if "bubble" in p:
        ns, ks = p["bubble"]["n"], p["bubble"]["k"]
        if not ks:
            raise ConfigError("bubble needs at least one k")
        for n in ns:
            q = cfg.q
            if not 0.5 * n < q < n:
                raise ConfigError(f"q={q} must satisfy n/2 < q < n for n={n}")
        tasks += [("single_bubble", (n,)) for n in ns]
        tasks += [("bubble", (n, k, cfg.kelvin_samples)) for n in ns for k in ks]
        if len(ks) >= 2:
            tasks += [("norm_decay", (n, tuple(ks), cfg.q, cfg.nodes)) for n in ns]
    return tasks


def run(cfg: RunConfig) -> VerificationReport:
    tasks = plan_tasks(cfg)
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    records = []
    for recs, ms in results:
        for r in recs:
            rec = Record.from_dict(r)
            if cfg.timings:
                rec.runtime_ms = ms
            records.append(rec)
    report = VerificationReport(suite=cfg.command, config=cfg.public(), records=records)
    if cfg.emit_grid and "bubble" in cfg.plan:
        b = cfg.plan["bubble"]
        ens = bubble.BubbleEnsemble.standard(b["n"][0], b["k"][0])
        pts = bubble.field_grid(ens)
        with open(cfg.emit_grid, "w", encoding="utf-8", newline="") as fh:
            bubble.write_grid_csv(pts, bubble.ustar_eval(ens, pts), fh)
    return report


def exit_code(report: VerificationReport) -> int:
    if any(r.values.get("numerical_error") for r in report.records):
        return EXIT_NUMERICAL
    return EXIT_OK if report.ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        report = run(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (YamabeCheckError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = report.to_json() if cfg.format == "json" else report.to_csv()
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write report: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
    else:
        sys.stdout.write(text)
    s = report.summary
    print(f"{s['pass']} passed, {s['fail']} failed, {s['info']} info", file=sys.stderr)
    return exit_code(report)
