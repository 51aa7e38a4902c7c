import numpy as np
import pytest

from inbetween import engine, quat
from inbetween.skeleton import FrameState, MotionClip, Skeleton


@pytest.fixture(autouse=True)
def _default_dtype_isolation():
    engine.set_default_dtype(np.float64)
    yield
    engine.set_default_dtype(np.float64)


ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        outcome = ACCEPTANCE_RESULTS[name].upper()
        terminalreporter.write_line(f"{name}: {outcome}")


def random_unit_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def make_chain_skeleton(n_joints, rng=None, bone_length=None):
    """Serial chain: joint k hangs off joint k-1. Random offsets unless given."""
    rng = rng or np.random.default_rng(0)
    offsets = np.zeros((n_joints, 3))
    for k in range(1, n_joints):
        if bone_length is None:
            offsets[k] = rng.normal(size=3)
        else:
            offsets[k] = [0.0, -bone_length, 0.0]
    feet = None
    if n_joints >= 2:
        feet = np.array([n_joints - 2, n_joints - 1, n_joints - 2, n_joints - 1])
    return Skeleton(
        parent=np.array([-1] + list(range(n_joints - 1))),
        offsets=offsets,
        names=[f"joint{k}" for k in range(n_joints)],
        mirror_map=np.arange(n_joints),
        foot_joints=feet,
    )


def random_frame(skeleton, rng):
    q = np.stack([random_unit_quat(rng) for _ in range(skeleton.joint_count)])
    return FrameState(q=q, root=rng.normal(size=3))


def identity_frame(skeleton, root=(0.0, 0.0, 0.0)):
    return FrameState(
        q=np.tile(quat.IDENTITY, (skeleton.joint_count, 1)),
        root=np.asarray(root, dtype=float),
    )


def make_clip(skeleton, frames, fps=30.0, subject="S1", action="test"):
    return MotionClip(skeleton, frames, fps=fps, subject=subject, action=action)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
