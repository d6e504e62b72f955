"""Smoke test for the `pmm` extension module.

Build it first:

    cargo build -p pmm-py --release --features extension-module
    cp target/release/libpmm.so python/pmm.so

or install it with `pip install --no-build-isolation ./crates/py` (needs maturin).
"""

import json
import pathlib
import sys

HERE = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

import pmm  # noqa: E402

FIXTURES = HERE.parent / "fixtures"


def load(name):
    return (FIXTURES / name).read_text()


def main():
    diagram = pmm.Diagram.from_json(load("example_i_nonformal.json"))
    model = diagram.build(5)
    assert model.barcode() == [(2, "0", "2"), (3, "1", "3")], model.barcode()
    text = model.presentation()
    assert "d x3_1 = x2_1^2" in text, text
    report = json.loads(model.report())
    assert report["passed"], report

    formal = pmm.Diagram.from_json(load("example_i_formal.json")).build(5)
    assert formal.barcode() == model.barcode()
    assert "|" not in formal.presentation()

    saved = json.loads(model.to_json())
    assert [g["name"] for g in saved["generators"]] == ["x2_1", "x3_1"]

    assert pmm.decompose(load("module_121.json")) == [(0, "0", "2"), (0, "1", None)]
    assert pmm.normalize_rational("6/4") == "3/2"

    try:
        pmm.Diagram.from_json(load("not_simply_connected.json"))
    except ValueError as e:
        assert "simply-connected" in str(e)
    else:
        raise AssertionError("a stage with first cohomology was accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
