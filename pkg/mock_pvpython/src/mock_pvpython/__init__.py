"""A stand-in for the pvpython interpreter, for integration tests.

Invoked exactly like the real thing (`mock-pvpython script.py`), selected
behavior comes from an expectation profile named by the MOCK_PVPYTHON_PROFILE
environment variable. No rendering happens: the script is checked statically
against the profile's required call sequence, then either a placeholder PNG is
written at the profiled resolution or a realistic traceback is printed.
"""

__version__ = "0.1.0"
