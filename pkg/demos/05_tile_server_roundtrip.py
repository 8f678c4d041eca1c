"""
Tile server round trip
======================

Drive the HTTP API in-process: create a style, fetch tiles and labels,
revalidate with ETags, edit the map, and confirm that only invalidated
tiles change.
"""

from fastapi.testclient import TestClient

from satmosaic import EngineConfig, Orchestrator, Rect, synth_procedural_map
from satmosaic.tileserver import create_app

vmap = synth_procedural_map(seed=1, extent=Rect(0, 0, 2000, 2000))
orch = Orchestrator(vmap, EngineConfig())
client = TestClient(create_app(orch))

print("health:", client.get("/api/v1/health").json())

style = client.post("/api/v1/styles", json={"seed": 42}).json()["style_id"]
print("created style:", style)

tile = client.get(f"/api/v1/tiles/{style}/1/0/0")
print(f"tile 1/0/0: {len(tile.content)} bytes, etag {tile.headers['etag'][:12]}…")

revalidated = client.get(f"/api/v1/tiles/{style}/1/0/0",
                         headers={"If-None-Match": tile.headers["etag"]})
print("revalidation status:", revalidated.status_code)  # 304, no body

labels = client.get("/api/v1/labels/1/0/0")
print(f"labels 1/0/0: {len(labels.content)} bytes (paletted PNG)")

far = client.get(f"/api/v1/tiles/{style}/1/7/7")
edit = client.post("/api/v1/edit",
                   json={"op": "rotate90", "z": 1, "x": 0, "y": 0}).json()
print(f"edit -> map_version {edit['map_version']}, "
      f"{len(edit['invalidated'])} tiles invalidated")

changed = client.get(f"/api/v1/tiles/{style}/1/0/0")
untouched = client.get(f"/api/v1/tiles/{style}/1/7/7")
print("edited tile bytes changed:", changed.content != tile.content)
print("far tile etag stable:", untouched.headers["etag"] == far.headers["etag"])

print("costs:", client.get("/api/v1/costs").json())
