import wave

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("depcost", max_examples=40, deadline=None)
settings.load_profile("depcost")

SR = 16000


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_pcm16(path, samples, sample_rate=SR, channels=1):
    """Reference WAV writer built on the stdlib ``wave`` module.

    ``samples`` holds int16 values, shaped (n,) or (n, channels).
    """
    pcm = np.asarray(samples, dtype="<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())


def sine(freq, duration, amplitude=0.5, sr=SR, phase=0.0):
    t = np.arange(int(round(duration * sr))) / sr
    return amplitude * np.sin(2 * np.pi * freq * t + phase)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = []


def record_acceptance(criterion, ok, detail=""):
    ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {criterion}" + (f"  ({detail})" if detail else ""))
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
