"""Fixtures: small on-disk sessions written by the upstream toolkit.

The toolkit (sparsewarp) appears here only as a producer and validator of
the session directory format; the package under test never imports it.
"""

import shutil

import numpy as np
import pytest

import sparsewarp as sw


def _make_session_dir(path, n_frames=5, with_hole=True):
    k = sw.Intrinsics(fx=36.0, fy=36.0, cx=23.5, cy=17.5, width=48, height=36)
    traj = sw.LinearTrajectory(
        start=sw.pose_looking((1.0, 1.5, 1.25), (1.0, 0.0, 0.0)),
        direction=(1.0, 0.0, 0.0), velocity=0.05, n_frames=n_frames,
    )
    session = sw.generate_session(
        sw.BoxScene(extents=(4.0, 3.0, 2.5)), traj, k,
        noise_sigma=0.02, dropout=0.1, seed=11,
    )
    if with_hole:
        # punch an invalid patch into gt so valid-pixel handling is exercised
        for f in session.frames:
            f.depth["gt"][10:14, 5:9] = 0.0
    sw.save_session(session, path)
    return path


@pytest.fixture(scope="session")
def pristine_session_dir(tmp_path_factory):
    """Never mutated; tests copy it."""
    return _make_session_dir(tmp_path_factory.mktemp("sessions") / "pristine")


@pytest.fixture
def session_dir(pristine_session_dir, tmp_path):
    dst = tmp_path / "session"
    shutil.copytree(pristine_session_dir, dst)
    return dst


@pytest.fixture
def plugin_dir(tmp_path, monkeypatch):
    """Directory on sys.path for writing throwaway model plugins."""
    d = tmp_path / "plugins"
    d.mkdir()
    monkeypatch.syspath_prepend(str(d))
    return d


def write_plugin(plugin_dir, name, body):
    (plugin_dir / f"{name}.py").write_text(body)
    return name
