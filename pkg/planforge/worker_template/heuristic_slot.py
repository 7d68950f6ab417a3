"""
Heuristic slot of a worker build.

compile_heuristic copies this file into the build directory and replaces the marker
line with the generated module, which must define heuristic(state, task) -> float.
"""
# @@HEURISTIC_SOURCE@@
