import io
import json
import struct
import zipfile

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from flowloop.service import create_app


def png_bytes(arr, mode):
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def rgb_png(w, h, seed=0):
    rng = np.random.default_rng(seed)
    return png_bytes(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8), "RGB")


def mask_png(w, h, full=True):
    level = 255 if full else 0
    return png_bytes(np.full((h, w), level, dtype=np.uint8), "L")


def stroke_doc(w, h, points, speed=1.0):
    return {
        "canvas": {"width": w, "height": h},
        "strokes": [{"points": points, "speed_scale": speed}],
    }


@pytest.fixture
def client():
    return TestClient(create_app())


def open_session(client, w=32, h=24):
    resp = client.post(
        "/sessions",
        files={
            "image": ("image.png", rgb_png(w, h), "image/png"),
            "mask": ("mask.png", mask_png(w, h), "image/png"),
        },
    )
    assert resp.status_code == 201
    return resp.json()["id"]


class TestCreateSession:
    def test_valid_pair(self, client):
        sid = open_session(client)
        assert isinstance(sid, str) and len(sid) > 8

    def test_dimension_mismatch(self, client):
        resp = client.post(
            "/sessions",
            files={
                "image": ("i.png", rgb_png(32, 32), "image/png"),
                "mask": ("m.png", mask_png(16, 16), "image/png"),
            },
        )
        assert resp.status_code == 400
        assert "dimension mismatch" in resp.json()["error"]

    def test_non_png_rejected(self, client):
        resp = client.post(
            "/sessions",
            files={
                "image": ("i.png", b"not a png", "image/png"),
                "mask": ("m.png", mask_png(8, 8), "image/png"),
            },
        )
        assert resp.status_code == 400


class TestPutSketches:
    def test_valid_stroke_normalized(self, client):
        sid = open_session(client)
        resp = client.put(
            f"/sessions/{sid}/sketches",
            json=stroke_doc(32, 24, [[2, 12], [29, 12]]),
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["version"] == 2
        assert len(body["sketches"]["strokes"]) == 1
        assert len(body["sketches"]["strokes"][0]["points"]) == 20

    def test_single_point_stroke_rejected(self, client):
        sid = open_session(client)
        resp = client.put(
            f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[5, 5]])
        )
        assert resp.status_code == 422

    def test_degenerate_points_rejected(self, client):
        sid = open_session(client)
        resp = client.put(
            f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[5, 5], [5, 5]])
        )
        assert resp.status_code == 422

    def test_unknown_session(self, client):
        resp = client.put(
            "/sessions/nope/sketches", json=stroke_doc(32, 24, [[1, 1], [9, 9]])
        )
        assert resp.status_code == 404

    def test_canvas_mismatch_rejected(self, client):
        sid = open_session(client)
        resp = client.put(
            f"/sessions/{sid}/sketches", json=stroke_doc(99, 99, [[1, 1], [9, 9]])
        )
        assert resp.status_code == 422

    def test_replace_not_append(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 5], [29, 5]]))
        resp = client.put(
            f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 18], [29, 18]])
        )
        body = resp.json()
        assert body["version"] == 3
        assert len(body["sketches"]["strokes"]) == 1

    def test_empty_list_clears_strokes(self, client):
        # undoing the last stroke re-PUTs an empty list
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 5], [29, 5]]))
        resp = client.put(
            f"/sessions/{sid}/sketches",
            json={"canvas": {"width": 32, "height": 24}, "strokes": []},
        )
        assert resp.status_code == 200
        assert resp.json()["version"] == 3
        assert resp.json()["sketches"]["strokes"] == []
        assert client.get(f"/sessions/{sid}/field").status_code == 409


class TestGetField:
    def test_png_format(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        resp = client.get(f"/sessions/{sid}/field")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert resp.headers["X-Session-Version"] == "2"
        with Image.open(io.BytesIO(resp.content)) as img:
            assert img.size == (32, 24)

    def test_flo_format(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        resp = client.get(f"/sessions/{sid}/field", params={"format": "flo"})
        assert resp.status_code == 200
        magic = struct.unpack_from("<f", resp.content, 0)[0]
        assert magic == pytest.approx(202021.25)

    def test_before_any_sketch_409(self, client):
        sid = open_session(client)
        resp = client.get(f"/sessions/{sid}/field")
        assert resp.status_code == 409
        assert "sketch" in resp.json()["error"]

    def test_bad_format_param(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        resp = client.get(f"/sessions/{sid}/field", params={"format": "bmp"})
        assert resp.status_code == 422

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/zzz/field").status_code == 404

    def test_new_sketches_flip_field_direction(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        flo_a = client.get(f"/sessions/{sid}/field", params={"format": "flo"}).content
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[16, 2], [16, 22]]))
        flo_b = client.get(f"/sessions/{sid}/field", params={"format": "flo"}).content
        a = np.frombuffer(flo_a, dtype="<f4", offset=12).reshape(24, 32, 2)
        b = np.frombuffer(flo_b, dtype="<f4", offset=12).reshape(24, 32, 2)
        assert np.abs(a[:, :, 0]).sum() > np.abs(a[:, :, 1]).sum()  # first: +x flow
        assert np.abs(b[:, :, 1]).sum() > np.abs(b[:, :, 0]).sum()  # then: +y flow


class TestStreamlines:
    def test_extracted_lines_are_sketch_json(self, client):
        sid = open_session(client, 64, 48)
        client.put(
            f"/sessions/{sid}/sketches",
            json=stroke_doc(64, 48, [[4, 24], [60, 24]], speed=1.5),
        )
        resp = client.get(f"/sessions/{sid}/streamlines")
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["canvas"] == {"width": 64, "height": 48}
        for stroke in doc["strokes"]:
            assert len(stroke["points"]) == 20

    def test_needs_sketches(self, client):
        sid = open_session(client)
        assert client.get(f"/sessions/{sid}/streamlines").status_code == 409


class TestPreview:
    def test_frame_count_and_zip(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        resp = client.get(f"/sessions/{sid}/preview", params={"frames": 8})
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "application/zip"
        assert resp.headers["X-Cache"] == "miss"
        with zipfile.ZipFile(io.BytesIO(resp.content)) as zf:
            names = sorted(zf.namelist())
            assert names == [f"frame_{n:04d}.png" for n in range(8)]

    def test_cache_hit_identical_bytes(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        first = client.get(f"/sessions/{sid}/preview", params={"frames": 4})
        second = client.get(f"/sessions/{sid}/preview", params={"frames": 4})
        assert second.headers["X-Cache"] == "hit"
        assert second.content == first.content

    def test_cache_invalidated_by_put(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        client.get(f"/sessions/{sid}/preview", params={"frames": 4})
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[16, 2], [16, 22]]))
        resp = client.get(f"/sessions/{sid}/preview", params={"frames": 4})
        assert resp.headers["X-Cache"] == "miss"
        assert resp.headers["X-Session-Version"] == "3"

    def test_different_n_recomputes(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        client.get(f"/sessions/{sid}/preview", params={"frames": 4})
        resp = client.get(f"/sessions/{sid}/preview", params={"frames": 6})
        assert resp.headers["X-Cache"] == "miss"

    def test_frames_range_enforced(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        assert client.get(f"/sessions/{sid}/preview", params={"frames": 1}).status_code == 422
        assert client.get(f"/sessions/{sid}/preview", params={"frames": 241}).status_code == 422

    def test_first_frame_is_source_image(self, client):
        sid = open_session(client)
        client.put(f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]]))
        resp = client.get(f"/sessions/{sid}/preview", params={"frames": 4})
        with zipfile.ZipFile(io.BytesIO(resp.content)) as zf:
            with zf.open("frame_0000.png") as fh:
                frame0 = np.asarray(Image.open(fh).convert("RGB"))
        src = np.asarray(Image.open(io.BytesIO(rgb_png(32, 24))).convert("RGB"))
        assert np.array_equal(frame0, src)


class TestIsolationAndSnapshots:
    def test_sessions_are_isolated(self, client):
        sid_a = open_session(client, 32, 24)
        sid_b = open_session(client, 32, 24)
        client.put(f"/sessions/{sid_a}/sketches", json=stroke_doc(32, 24, [[2, 5], [29, 5]]))
        # b has no sketches and version 1 still
        assert client.get(f"/sessions/{sid_b}/field").status_code == 409
        resp = client.put(
            f"/sessions/{sid_b}/sketches", json=stroke_doc(32, 24, [[2, 9], [29, 9]])
        )
        assert resp.json()["version"] == 2

    def test_snapshot_restore(self, tmp_path):
        data_dir = str(tmp_path / "snapshots")
        app = create_app(data_dir=data_dir)
        with TestClient(app) as client:
            sid = open_session(client)
            client.put(
                f"/sessions/{sid}/sketches", json=stroke_doc(32, 24, [[2, 12], [29, 12]])
            )
        # a fresh app over the same directory sees the session at version 2
        app2 = create_app(data_dir=data_dir)
        with TestClient(app2) as client2:
            resp = client2.get(f"/sessions/{sid}/field")
            assert resp.status_code == 200
            assert resp.headers["X-Session-Version"] == "2"
