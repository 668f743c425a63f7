"""Desk-scale software twin of a 5G teleoperated-driving testbed.

Subsystems: wire messages (messages), impaired-link emulation (netem), the
vehicle agent (vehicle), the video-path delay ledger (videopath), the
measurement suite (metrics), scenario configuration (scenario), the
virtual-clock runner (runner) and the live WebSocket bridge (bridge).
"""

__version__ = "0.1.0"
