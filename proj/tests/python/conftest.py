import os
import sys

_src = os.environ.get("EPICAP_SRC")
if _src:
    sys.path.insert(0, os.path.join(_src, "python"))
