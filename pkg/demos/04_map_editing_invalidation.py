"""
Map edits and precise invalidation
==================================

Rotate one map tile and watch the cache: only tiles whose generation
inputs can see the edited area are recomputed, everything else keeps its
exact bytes.
"""

from pathlib import Path

import numpy as np

from satmosaic import (EngineConfig, Layer, Orchestrator, Rect, TileAddress,
                       synth_procedural_map)
from satmosaic.imaging import save_image

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

vmap = synth_procedural_map(seed=5, extent=Rect(0, 0, 4000, 4000))
orch = Orchestrator(vmap, EngineConfig())
session = orch.create_session(seed=9)

region = Rect(0, 0, 4000, 4000)
before = orch.render_region(session, 1, region)
save_image(out / "edit_before.png", before)
cached_before = len(orch.cache.keys())

invalidated = orch.apply_edit(session, orch.edit_rotate_tile(1, 1, 1))
print(f"edit invalidated {len(invalidated)} of {cached_before} cached tiles:")
for addr in invalidated:
    print(f"  {addr}")

after = orch.render_region(session, 1, region)
save_image(out / "edit_after.png", after)

# Difference image: the change is confined to the edited tile; its
# neighbors keep their bytes because the mock generator is pixel-local.
diff = np.abs(after - before).sum(axis=2)
save_image(out / "edit_diff.png", diff / max(diff.max(), 1e-9))
changed_tiles = {(int(x // 256), int(y // 256))
                 for y, x in zip(*np.nonzero(diff))}
print(f"tiles with changed pixels: {sorted(changed_tiles)}")

rotated = {(a.x, a.y) for a in invalidated if a.layer is Layer.OUT and a.z == 1}
assert changed_tiles <= rotated, "changes must stay inside the invalidation closure"
print(f"wrote {out}/edit_before.png, edit_after.png, edit_diff.png")
