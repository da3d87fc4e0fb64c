"""Magic (non-stabilizerness) from OTOC fluctuations in qubit and qutrit circuits."""

__version__ = "0.1.0"
