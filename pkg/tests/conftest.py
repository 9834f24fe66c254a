import json
import math

import pytest

from conecert.conespace import RegionSpec
from conecert.expr import parse_expr
from conecert.kernels import DirichletNeumann
from conecert.solver import ProblemSpec

# the two worked systems used across the suite
F_SYMMETRIC_1 = "4.5 + 5*phi(x1)*psi(x2) - 4*capphi(x1)"
F_SYMMETRIC_2 = "4.5 + 5*phi(x2)*psi(x1) - 4*capphi(x2)"
F_HYBRID_1 = "0.5 + 5*phi(x1)*psi(x2)"
F_HYBRID_2 = "exp(x2^2/32) + 0.1*cos(pi*x1)"


@pytest.fixture
def nine_problem():
    region = RegionSpec(d=(0.5, 0.5), a=(1.0, 1.0), c=(5.0, 5.0), b=(2.0, 2.0))
    return ProblemSpec(DirichletNeumann(), DirichletNeumann(),
                       parse_expr(F_SYMMETRIC_1), parse_expr(F_SYMMETRIC_2),
                       region, "nine")


@pytest.fixture
def hybrid_problem():
    region = RegionSpec(d=(0.5, 0.5), a=(1.0, 1.0), c=(5.0, 5.0),
                        annulus=(2.0, 5.0))
    return ProblemSpec(DirichletNeumann(), DirichletNeumann(),
                       parse_expr(F_HYBRID_1), parse_expr(F_HYBRID_2),
                       region, "hybrid")


def nine_config(report="report.json", csv_dir="solutions"):
    return {
        "problem": {
            "mode": "nine",
            "kernel1": "dirichlet_neumann",
            "kernel2": "dirichlet_neumann",
            "f1": F_SYMMETRIC_1,
            "f2": F_SYMMETRIC_2,
            "region": {"d": 0.5, "a": 1.0, "b": 2.0, "c": 5.0},
        },
        "output": {"report": report, "csv_dir": csv_dir},
    }


def hybrid_config(report="report.json"):
    return {
        "problem": {
            "mode": "hybrid",
            "kernel1": "dirichlet_neumann",
            "kernel2": "dirichlet_neumann",
            "f1": F_HYBRID_1,
            "f2": F_HYBRID_2,
            "region": {"d": 0.5, "a": 1.0, "c": 5.0, "annulus": [2.0, 5.0]},
        },
        "output": {"report": report},
    }


def closing_rcd_config(beta1=1.0, beta2=1.0, m1=3.0, m2=1.0):
    return {
        "rcd": {"beta1": beta1, "beta2": beta2, "k1": 8.0, "k2": 10.0,
                "r1": 8.0, "r2": 10.0, "m1": m1, "m2": m2},
        "output": {"report": "rcd_report.json"},
    }


def closing_problem_config(beta=1.0):
    """The closing worked system with its coefficients written out."""
    st8 = (8 - 2 + math.sqrt(8 * 4)) / 2
    st10 = (10 - 2 + math.sqrt(10 * 6)) / 2
    s8 = (8 - 2 - math.sqrt(8 * 4)) / 2
    s10 = (10 - 2 - math.sqrt(10 * 6)) / 2
    eb = math.exp(1.0 / beta)
    p1 = 1.0 * math.exp(-1.0 / beta)
    q1 = 10 * st10 * eb
    p2 = 3.0 * math.exp(-1.0 / beta)
    q2 = 8 * st8 * eb
    return {
        "problem": {
            "mode": "thm53",
            "remark52": True,
            "kernel1": {"kind": "rcd", "beta": beta},
            "kernel2": {"kind": "rcd", "beta": beta},
            "f1": f"{p1!r}*({q1!r} - x2)*exp(-8/(1 + x1))",
            "f2": f"{p2!r}*({q2!r} - x1)*exp(-10/(1 + x2))",
            "region": {"d": [s8, s10], "a": [st8, st10],
                       "c": [st8 * eb, st10 * eb]},
        },
        "output": {"report": "report.json"},
    }


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)
