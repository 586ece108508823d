"""Autocorrelation statistics and power allocation for random OFDM signals.

Submodules: ``constellation``, ``waveform``, ``acf``, ``closed_form``,
``optimizer`` and ``harness``; ``cli`` wires them to the ``ofdm-pa`` command.
"""

__version__ = "0.1.0"
