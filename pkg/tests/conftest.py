import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def write_agent(tmp_path):
    def _write(agent_id, text, root=None):
        root = root or tmp_path / "ds"
        root.mkdir(exist_ok=True)
        (root / f"agent_{agent_id}.plans").write_text(text, encoding="utf-8")
        return root

    return _write
