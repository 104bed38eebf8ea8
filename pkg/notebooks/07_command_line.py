"""
Command-line reports
====================

The same analyses through the ``kskeleton`` command. Everything printed
is JSON with fixed 17-digit floats, so repeated runs diff clean.
"""

# %%
import json
import os
import tempfile

from kskeleton.cli import main

tmp = tempfile.mkdtemp()
op = os.path.join(tmp, "op.json")
with open(op, "w") as fh:
    json.dump({
        "symbol": {"coeffs": [{"m": 0, "re": -1.0, "im": 0.0}, {"m": 1, "re": -1.5, "im": 0.0}, {"m": 2, "re": 1.0, "im": 0.0}]},
        "correction": [{"i": 0, "j": 1, "re": 0.2, "im": 0.1}],
    }, fh)

# %%
main(["index", op])

# %%
out = os.path.join(tmp, "factor")
main(["factor", op, "--out", out])
print(sorted(os.listdir(out)))

# %%
code = main(["verify", op, os.path.join(out, "factor_dump.json")])
print("exit code", code)
