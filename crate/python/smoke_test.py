"""Smoke test for the drgcert Python module.

Run after building the extension, e.g. `maturin develop -m crates/python/Cargo.toml`
or by putting the built shared library on PYTHONPATH as `drgcert.so`.
"""

import json

import drgcert


def main():
    f = drgcert.GF(9)
    assert f.modulus == "x^2 + 1", f.modulus
    assert all(f.mul(a, f.inv(a)) == 1 for a in range(1, 9))

    z = drgcert.build_z(2)
    assert (z.n, z.regular_degree()) == (64, 7)
    assert z.neighbors(0) == [8, 16, 24, 32, 40, 48, 56]
    assert z.labels()[8] == "0,0,1,0,0,0"

    r = drgcert.check_distance_regular(z)
    assert r["regular"] and r["array"] == ([7, 6, 5], [1, 2, 3]), r
    assert drgcert.drg_spectrum([7, 6, 5], [1, 2, 3], 64) == [(7, 1), (3, 21), (-1, 35), (-5, 7)]
    assert drgcert.multiplicity_by_rank(z, -1) == 35

    ebd = drgcert.extended_bipartite_double(z)
    d12 = drgcert.distance_1_or_2(z)
    assert drgcert.halved_graph(ebd, "plus") == d12
    assert drgcert.check_srg(d12) == (64, 28, 12, 12)

    k4e = drgcert.Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    bad = drgcert.check_distance_regular(k4e)
    assert not bad["regular"] and bad["witness"]["base"] == 2

    g6 = z.to_graph6()
    assert drgcert.Graph.from_graph6(g6) == z
    assert drgcert.Graph.from_graph6("A_").edges() == [(0, 1)]

    report = json.loads(drgcert.certify_graph(drgcert.far_from_edge_d4(2), "d4far", expect="d4far:2"))
    assert all(c["pass"] for c in report["checks"]), report["checks"]
    assert report["array"] == {"b": [8, 7, 6, 5], "c": [1, 2, 3, 8]}

    assert all(ok for _, ok, _ in drgcert.verify_prop32_iso(2))
    assert all(ok for _, ok, _ in drgcert.reflection_quotient_check(2))
    assert drgcert.z_distance_class(2, [0, 0, 0], [1, 0, 0]) == 3
    assert json.loads(drgcert.expected_params("b3", 2))["array"]["b"] == [14, 12, 8]

    try:
        drgcert.build_z(6)
    except ValueError as e:
        assert "prime power" in str(e)
    else:
        raise AssertionError("q=6 accepted")

    print("drgcert", drgcert.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
