"""
Shared hypothesis profile for the property tests.

Examples build dense operators up to 32 x 32, so per-example deadlines and
the generation-speed health check are switched off.
"""
from hypothesis import HealthCheck, settings

settings.register_profile("qsr", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qsr")
