"""Build the extension module, import it and check a few known values.

Usage: python3 python/smoke_test.py [--no-build]
"""

import importlib.util
import math
import pathlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "wedgecrack-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )


def load(tmp):
    lib = ROOT / "target" / "release" / "libwedgecrack_py.so"
    if not lib.exists():
        lib = lib.with_suffix(".dylib")
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    dest = pathlib.Path(tmp) / ("wedgecrack_py" + suffix)
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("wedgecrack_py", dest)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    if "--no-build" not in sys.argv:
        build()
    with tempfile.TemporaryDirectory() as tmp:
        wc = load(tmp)
        checks = []

        d = wc.edge_sif(math.pi / 2)
        checks.append(("edge D11 at pi/2", close(d["d11"], 1.776778, 1e-5)))
        checks.append(("edge D22 at pi/2", close(d["d22"], 1.813571, 1e-5)))

        e = wc.edge_eigen_sif(math.pi / 4, which="first")
        checks.append(("first eigen mu at pi/4", close(e["mu"], 0.673583, 1e-6)))

        g = wc.koiter_gamma()
        checks.append(("koiter gamma", close(g, 1.1215222, 1e-6)))

        h = wc.halfplane_sif(0.5)
        km, kp = wc.halfplane_oracle(0.5)
        checks.append(("half-plane vs collocation", close(h["k_i_plus"], kp, 1e-3)))

        i = wc.internal_sif(math.pi / 2, 0.5)
        checks.append(("internal closure", i["closure_defect"] < 1e-8))

        try:
            wc.edge_sif(0.0)
            checks.append(("alpha = 0 rejected", False))
        except ValueError:
            checks.append(("alpha = 0 rejected", True))

        ok = True
        for name, passed in checks:
            print(("PASS" if passed else "FAIL") + "  " + name)
            ok &= passed
        return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
