"""Smoke test for the ncscatter extension module.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/*.whl
"""
import json
import math

import numpy as np

import ncscatter


def main():
    inst = ncscatter.LiftingInstance.generate(2, 2, 2, seed=42)
    assert (inst.d, inst.dim_c, inst.dim_a, inst.dim_e) == (2, 2, 2, 4)

    # Row coisometry of E and the lifting property, checked in numpy.
    e = [np.array(inst.e(j)) for j in (1, 2)]
    c = [np.array(inst.c(j)) for j in (1, 2)]
    assert np.allclose(sum(m @ m.conj().T for m in e), np.eye(4), atol=1e-10)
    for ej, cj in zip(e, c):
        assert np.allclose(ej.conj().T[:2, :2], cj.conj().T, atol=1e-12)

    report = inst.verify(3)
    assert report.all_pass, str(report)
    assert all(row["pass"] for row in report.checks())
    assert json.loads(report.to_json())["schemaVersion"] == 1

    w = np.array(inst.w_matrix(2))
    assert np.allclose(w @ w.conj().T, np.eye(w.shape[0]), atol=1e-10)

    theta = inst.transfer(3)
    chi = inst.charfn(3)
    assert len(theta) == 1 + 2 + 4 + 8
    for word in chi.words():
        assert np.allclose(chi.coeff(word), theta.coeff(word[::-1]), atol=1e-10)
    assert inst.toeplitz_norm(3) <= 1 + 1e-8

    # Same instance through JSON.
    again = ncscatter.LiftingInstance.from_json(inst.to_json())
    assert np.allclose(again.gamma, inst.gamma)

    # C = (1/√2, 1/√2), A = 0, B = (1/√2, -1/√2): only the word "1" survives in Θ(D_E)_1.
    h = 1 / math.sqrt(2)
    small = ncscatter.LiftingInstance.assemble(
        c=[[[h]], [[h]]], a=[[[0j]], [[0j]]], b=[[[h]], [[-h]]]
    )
    blocks = small.charfn(3)
    for word in blocks.words():
        if len(word) >= 2:
            assert np.abs(np.array(blocks.coeff(word))).max() < 1e-14
    assert small.verify(2).all_pass

    try:
        ncscatter.LiftingInstance.generate(2, 1, 3, a_scale=0.0)
    except ValueError as exc:
        assert "infeasible" in str(exc)
    else:
        raise AssertionError("expected an infeasible instance")

    print(f"ok: {len(report)} checks, max violation {report.max_violation:.2e}")


if __name__ == "__main__":
    main()
