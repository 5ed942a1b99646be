"""Hot inner loops, each in a numba and a numpy flavour.

Every kernel module exposes ``<name>_nb`` (numba) and ``<name>_np`` (numpy)
plus a dispatching ``<name>`` chosen by :mod:`glyphassign._accel`.
"""
