"""Procedural gait corpus on a small chain skeleton.

Clips are parameterized gait cycles: random heading and speed for the root,
sinusoidal sagittal joint swings with a random phase over a fixed cycle
period. Deterministic given the seed; subjects are assigned round-robin with
S5 conventionally reserved for testing.
"""
from __future__ import annotations

import numpy as np

from . import quat
from .motionops import with_extracted_contacts
from .skeleton import FrameState, MotionClip, Skeleton

GAIT_PERIOD_FRAMES = 30
CONTACT_THRESHOLD = 0.05
SUBJECTS = ("S1", "S2", "S3", "S4", "S5")

SWING_AMPLITUDES = (0.5, 0.35, 0.2)
SWING_PHASE_LAG = 0.6
# the swing axis is tilted off the sagittal plane and the root sways
# sideways and vertically, so every position dimension carries real signal
SWING_AXIS = (1.0, 0.0, 0.25)
LATERAL_SWAY = 0.08
VERTICAL_BOB = 0.05


def chain_skeleton() -> Skeleton:
    """4-joint chain: root at standing height with three leg segments below."""
    skel = Skeleton(
        parent=np.array([-1, 0, 1, 2]),
        offsets=np.array([[0.0, 1.1, 0.0], [0.0, -0.5, 0.0], [0.0, -0.5, 0.0], [0.0, -0.1, 0.0]]),
        names=["Hips", "UpperLeg", "Foot", "Toe"],
        mirror_map=np.arange(4),
        foot_joints=np.array([2, 3, 2, 3]),
    )
    skel.rotation_orders = ["ZYX"] * 4
    return skel


def gait_clip(skeleton: Skeleton, heading: float, speed: float, phase: float,
              n_frames: int = 121, fps: float = 30.0, subject: str = "S1",
              start=(0.0, 0.0)) -> MotionClip:
    """One gait cycle clip.

    heading: world yaw of travel (radians); speed in units/second; phase
    shifts the swing cycle. The root bobs vertically at twice the stride
    frequency; joints swing about their local X (sagittal plane).
    """
    omega = 2.0 * np.pi / GAIT_PERIOD_FRAMES
    direction = np.array([np.cos(heading), 0.0, np.sin(heading)])
    lateral = np.array([-np.sin(heading), 0.0, np.cos(heading)])
    # local +Z is the forward axis; yaw so it points along `direction`
    root_q = quat.yaw_about_y(np.pi / 2.0 - heading)
    frames = []
    for t in range(n_frames):
        root = np.array([start[0], 0.0, start[1]]) + direction * (speed * t / fps)
        root += lateral * (LATERAL_SWAY * np.sin(omega * t + phase + 1.0))
        root[1] = 1.05 + VERTICAL_BOB * np.sin(2.0 * omega * t + phase)
        q = np.zeros((4, 4))
        q[0] = root_q
        for k, amp in enumerate(SWING_AMPLITUDES, start=1):
            angle = amp * np.sin(omega * t + phase + SWING_PHASE_LAG * k)
            q[k] = quat.from_axis_angle(SWING_AXIS, angle)
        frames.append(FrameState(q=q, root=root))
    clip = MotionClip(skeleton, frames, fps=fps, subject=subject, action="gait")
    return with_extracted_contacts(clip, CONTACT_THRESHOLD)


def make_gait_corpus(n_clips: int = 200, seed: int = 0, n_frames: int = 121) -> list[MotionClip]:
    """Corpus of gait clips with random phase/speed/heading per clip."""
    rng = np.random.default_rng(seed)
    skeleton = chain_skeleton()
    clips = []
    for i in range(n_clips):
        clips.append(
            gait_clip(
                skeleton,
                heading=rng.uniform(0.0, 2.0 * np.pi),
                speed=rng.uniform(0.3, 0.8),
                phase=rng.uniform(0.0, 2.0 * np.pi),
                n_frames=n_frames,
                subject=SUBJECTS[i % len(SUBJECTS)],
            )
        )
    return clips


def split_corpus(clips, test_subject: str = "S5"):
    train = [c for c in clips if c.subject != test_subject]
    test = [c for c in clips if c.subject == test_subject]
    return train, test


def toy_run_config(iterations: int = 5000, seed: int = 1):
    """Desk-scale training setup for the chain corpus.

    Optimizer and loss hyperparameters are the published defaults; network
    widths are scaled to the 4-joint skeleton so the run finishes in minutes
    on a CPU. Returns (GeneratorConfig, TrainingParams, critic_hidden).
    """
    from .model.config import GeneratorConfig, TrainingParams

    config = GeneratorConfig(
        joint_count=4,
        encoder_hidden=64,
        encoder_out=32,
        lstm_hidden=96,
        decoder_hidden=64,
        decoder_hidden2=48,
        p_max=30,
    )
    params = TrainingParams(
        iterations=iterations,
        batch_size=32,
        iterations_per_epoch=400,
        n_ep_max=3,
        seed=seed,
    )
    return config, params, (96, 48)
