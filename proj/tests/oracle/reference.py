"""Reference objective values for the benchmark suite.

Reads the data written by `proxcomp bench --dump-data data.json`, solves
each problem with cvxpy at tight tolerances and prints a JSON map
problem -> objective. The acceptance test compares against the frozen copy
in reference.json; rerun this after changing a generator.

    proxcomp bench --dump-data /tmp/data.json
    python3 reference.py /tmp/data.json > reference.json
"""
import json
import sys

import cvxpy as cp
import numpy as np


def mat(d):
    return np.array(d["values"], dtype=float).reshape((d["rows"], d["cols"]), order="F")


def vec(d):
    return mat(d).ravel(order="F")


def build(name, p):
    d, h = p["data"], p["hyper"]
    if name in ("lasso", "lasso_sparse"):
        X, y = mat(d["X"]), vec(d["y"])
        t = cp.Variable(X.shape[1])
        return 0.5 * cp.sum_squares(X @ t - y) + h["lambda"] * cp.norm1(t), []
    if name == "mv_lasso":
        X, Y = mat(d["X"]), mat(d["Y"])
        T = cp.Variable((X.shape[1], Y.shape[1]))
        return 0.5 * cp.sum_squares(X @ T - Y) + h["lambda"] * cp.sum(cp.abs(T)), []
    if name == "fused_lasso":
        X, y = mat(d["X"]), vec(d["y"])
        t = cp.Variable(X.shape[1])
        return (0.5 * cp.sum_squares(X @ t - y) + h["lambda"] * cp.norm1(t)
                + h["lambda_tv"] * cp.norm1(cp.diff(t))), []
    if name == "tv_1d":
        y = vec(d["y"])
        x = cp.Variable(y.size)
        return 0.5 * cp.sum_squares(x - y) + h["lambda"] * cp.norm1(cp.diff(x)), []
    if name.startswith("hinge"):
        Z = mat(d["Z"])
        t = cp.Variable(Z.shape[1])
        reg = cp.sum_squares(t) if "l2" in name else cp.norm1(t)
        return cp.sum(cp.pos(1 - Z @ t)) + h["lambda"] * reg, []
    if name.startswith("logreg"):
        Z = mat(d["Z"])
        t = cp.Variable(Z.shape[1])
        return cp.sum(cp.logistic(-Z @ t)) + h["lambda"] * cp.norm1(t), []
    if name == "huber":
        X, y = mat(d["X"]), vec(d["y"])
        t = cp.Variable(X.shape[1])
        return cp.sum(cp.huber(X @ t - y, h["M"])), []
    if name == "least_abs_dev":
        X, y = mat(d["X"]), vec(d["y"])
        t = cp.Variable(X.shape[1])
        return cp.norm1(X @ t - y), []
    if name == "lp":
        A, b, c = mat(d["A"]), vec(d["b"]), vec(d["c"])
        x = cp.Variable(A.shape[1])
        return c @ x, [A @ x == b, x >= 0]
    if name == "qp":
        F, q = mat(d["F"]), vec(d["q"])
        x = cp.Variable(F.shape[1])
        return 0.5 * cp.sum_squares(F @ x) + q @ x, [x >= 0, x <= 1]
    if name == "basis_pursuit":
        A, b = mat(d["A"]), vec(d["b"])
        x = cp.Variable(A.shape[1])
        return cp.norm1(x), [A @ x == b]
    if name == "covsel":
        S = mat(d["S"])
        T = cp.Variable(S.shape, symmetric=True)
        return -cp.log_det(T) + cp.trace(S @ T) + h["lambda"] * cp.sum(cp.abs(T)), []
    if name == "robust_pca":
        M = mat(d["M"])
        L, S = cp.Variable(M.shape), cp.Variable(M.shape)
        return cp.normNuc(L) + h["mu"] * cp.sum(cp.abs(S)), [L + S == M]
    raise KeyError(name)


def main():
    with open(sys.argv[1]) as f:
        data = json.load(f)
    out = {}
    for name in sorted(data):
        obj, cons = build(name, data[name])
        prob = cp.Problem(cp.Minimize(obj), cons)
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9)
        out[name] = {"objective": float(prob.value), "status": prob.status}
        print(name, prob.status, prob.value, file=sys.stderr)
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    print()


if __name__ == "__main__":
    main()
