import math

import numpy as np
import pytest

from fintrace.binary import BinaryImage, boundary, largest_component, threshold_apply
from fintrace.chain import (
    ChainOutline,
    EndpointDetectionFailed,
    EndpointPair,
    Point,
    WalkError,
    compute_secant,
    detect_endpoints_auto,
    outline_from_dict,
    outline_to_dict,
    rescale_outline,
    validate_outline,
    walk_outline,
    write_outline_json,
    write_outline_xy,
)
from fintrace.images import GrayImage


def chain_is_simple_and_4adjacent(points):
    seen = set()
    for p in points:
        if tuple(p) in seen:
            return False
        seen.add(tuple(p))
    for a, b in zip(points, points[1:]):
        if abs(a.x - b.x) + abs(a.y - b.y) != 1:
            return False
    return True


class TestEndpointPair:
    def test_orientation_enforced(self):
        with pytest.raises(ValueError, match="swimming"):
            EndpointPair(start=(40, 50), end=(10, 50))

    def test_valid(self):
        e = EndpointPair(start=(10, 50), end=(40, 50))
        assert e.start == Point(10, 50)


class TestComputeSecant:
    def test_horizontal_pair(self):
        geo = compute_secant(EndpointPair((10, 50), (40, 50)), 100, 100)
        assert geo.secant_y == 50
        assert geo.length == 30
        assert geo.bisector_x == 25
        assert geo.fin_seed == Point(25, 35)

    def test_min_y_rule(self):
        geo = compute_secant(EndpointPair((10, 60), (40, 50)), 100, 100)
        assert geo.secant_y == 50

    def test_seed_clamped_to_image(self):
        geo = compute_secant(EndpointPair((2, 5), (90, 5)), 100, 100)
        assert geo.fin_seed.y == 0


class TestWalkOutline:
    def block_ring(self):
        """Ring around a 20x10 solid block; endpoints at its lower corners."""
        px = np.zeros((24, 32), dtype=bool)
        px[8:18, 6:26] = True
        ring = boundary(BinaryImage(px))
        e = EndpointPair((6, 17), (25, 17))
        geo = compute_secant(e, 32, 24)
        return ring, geo, e

    def test_ring_traversed_over_the_top(self):
        ring, geo, e = self.block_ring()
        chain = walk_outline(ring, geo, e)
        assert len(chain.points) >= 30
        assert chain.points[0] == Point(6, 17)
        assert chain.points[-1] == Point(25, 17)
        assert any(p.y == 8 for p in chain.points)  # crosses the top edge
        assert chain_is_simple_and_4adjacent(chain.points)
        # every chain pixel lies on the boundary raster
        assert all(ring.px[p.y, p.x] for p in chain.points)

    def test_closed_form_flag_on_ring(self):
        ring, geo, e = self.block_ring()
        # the raw walk wraps the whole ring; its ends meet near the bottom cut
        assert walk_outline(ring, geo, e).closed_form

    def test_open_arc_between_image_edges(self):
        # water-line blob: everything below a bumped curve, touching both edges
        w, h = 40, 30
        px = np.zeros((h, w), dtype=bool)
        for x in range(w):
            top = 18 - int(round(10 * math.exp(-((x - 20) ** 2) / 60)))
            px[top:, x] = True
        ring = boundary(BinaryImage(px))
        e = EndpointPair((10, 17), (30, 17))
        geo = compute_secant(e, w, h)
        chain = walk_outline(ring, geo, e)
        assert chain_is_simple_and_4adjacent(chain.points)
        assert math.dist(chain.points[0], e.start) <= 3
        assert math.dist(chain.points[-1], e.end) <= 3
        assert min(p.y for p in chain.points) <= 9  # follows the bump crest

    def test_no_pixel_near_bisector(self):
        px = np.zeros((20, 40), dtype=bool)
        px[5:9, 2:6] = True  # blob far west of the bisector
        ring = boundary(BinaryImage(px))
        e = EndpointPair((16, 12), (24, 12))
        geo = compute_secant(e, 40, 20)
        with pytest.raises(WalkError):
            walk_outline(ring, geo, e)

    def test_bisector_straddle_search(self):
        # blob sits just east of the bisector column: the seed search must
        # fall over to a nearby occupied column instead of erroring
        px = np.zeros((24, 40), dtype=bool)
        px[8:18, 18:31] = True
        ring = boundary(BinaryImage(px))
        e = EndpointPair((10, 17), (24, 17))
        geo = compute_secant(e, 40, 24)
        assert geo.bisector_x == 17
        assert not ring.px[:, 17].any()
        chain = walk_outline(ring, geo, e)
        assert chain_is_simple_and_4adjacent(chain.points)
        assert all(ring.px[p.y, p.x] for p in chain.points)

    def test_bisector_too_far_from_any_outline_column(self):
        px = np.zeros((24, 40), dtype=bool)
        px[8:18, 25:31] = True
        ring = boundary(BinaryImage(px))
        e = EndpointPair((2, 17), (12, 17))  # bisector at 8, blob at x >= 25
        geo = compute_secant(e, 40, 24)
        with pytest.raises(WalkError):
            walk_outline(ring, geo, e)

    def test_visits_no_pixel_twice_on_noisy_blobs(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            g = GrayImage(
                (rng.random((28, 36)) * 255).astype(np.uint8)
            )
            b = threshold_apply(g, 110)
            if b.foreground_count() < 8:
                continue
            blob = largest_component(b)
            ring = boundary(blob)
            e = EndpointPair((8, 20), (28, 20))
            geo = compute_secant(e, 36, 28)
            try:
                chain = walk_outline(ring, geo, e)
            except WalkError:
                continue
            assert chain_is_simple_and_4adjacent(chain.points)


class TestDetectEndpointsAuto:
    def triangle_ring(self):
        px = np.zeros((26, 40), dtype=bool)
        apex_x, apex_y, base_y = 20, 4, 22
        for y in range(apex_y, base_y + 1):
            half = int(round((y - apex_y) * 0.75))
            px[y, apex_x - half : apex_x + half + 1] = True
        return boundary(BinaryImage(px)), apex_x

    def test_triangle_start_left_end_right(self):
        ring, apex_x = self.triangle_ring()
        pair = detect_endpoints_auto(ring)
        assert pair.start.x < apex_x < pair.end.x
        assert pair.start.y > 4 and pair.end.y > 4  # both on the slopes, not the apex

    def test_horizontal_line_has_no_triple(self):
        px = np.zeros((5, 20), dtype=bool)
        px[2, 2:18] = True
        with pytest.raises(EndpointDetectionFailed):
            detect_endpoints_auto(BinaryImage(px))

    def test_semicircle_quarters(self):
        # 4-connected rasterization: each column's run spans to its neighbor's
        w, h, cx, cy, r = 60, 32, 30, 28, 24
        px = np.zeros((h, w), dtype=bool)
        tops = {
            x: int(round(cy - math.sqrt(r * r - (x - cx) ** 2)))
            for x in range(cx - r, cx + r + 1)
        }
        for x in range(cx - r, cx + r + 1):
            prev = tops.get(x - 1, tops[x])
            lo, hi = sorted((tops[x], prev))
            px[lo : hi + 1, x] = True
        pair = detect_endpoints_auto(BinaryImage(px))
        assert pair.start.x <= cx - r // 2  # first quarter
        assert pair.end.x >= cx + r // 2  # last quarter


class TestValidateOutline:
    def test_straight_two_point_chain_too_short(self):
        e = EndpointPair((0, 0), (30, 0))
        o = ChainOutline(points=[Point(0, 0), Point(30, 0)])
        reason = validate_outline(o, e)
        assert reason is not None and "short" in reason

    def test_semicircular_chain_ok(self):
        e = EndpointPair((0, 0), (60, 0))
        pts = [
            Point(int(round(30 - 30 * math.cos(t))), int(round(-30 * math.sin(t))))
            for t in np.linspace(0, math.pi, 200)
        ]
        o = ChainOutline(points=pts)
        assert validate_outline(o, e) is None  # arc ~ 1.57 x secant

    def test_terminus_far_from_end_rejected(self):
        e = EndpointPair((0, 0), (100, 0))
        # arc comfortably long (140 px > 1.2 x 100) but its far terminus stops
        # 40 px short of the end point
        pts = (
            [Point(0, -y) for y in range(0, 41)]
            + [Point(x, -40) for x in range(1, 61)]
            + [Point(60, -40 + y) for y in range(1, 41)]
        )
        o = ChainOutline(points=pts)
        reason = validate_outline(o, e)
        assert reason is not None and "end point" in reason


class TestRescaleOutline:
    def test_identity(self):
        o = ChainOutline(points=[Point(1, 1), Point(2, 1), Point(2, 2)])
        out = rescale_outline(o, 1, Point(0, 0))
        assert out.points == o.points

    def test_scale_four_horizontal(self):
        o = ChainOutline(points=[Point(0, 0), Point(1, 0)])
        out = rescale_outline(o, 4, Point(0, 0))
        assert out.points == [Point(x, 0) for x in range(5)]
        assert out.scale == 4

    def test_offset_translation(self):
        o = ChainOutline(points=[Point(1, 2), Point(2, 2)])
        out = rescale_outline(o, 1, Point(100, 50))
        assert out.points == [Point(101, 52), Point(102, 52)]

    def test_result_is_4adjacent_on_turns(self):
        o = ChainOutline(points=[Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)])
        out = rescale_outline(o, 3, Point(0, 0))
        assert chain_is_simple_and_4adjacent(out.points)

    def test_round_trip_bound(self):
        # a full-resolution coordinate mapped down and back moves < scale px
        scale, off = 4, Point(37, 12)
        for fx, fy in [(37, 12), (60, 40), (121, 99), (38, 13)]:
            wx, wy = (fx - off.x) // scale, (fy - off.y) // scale
            bx, by = off.x + scale * wx, off.y + scale * wy
            assert abs(bx - fx) < scale and abs(by - fy) < scale


class TestSerialization:
    def test_json_round_trip(self, tmp_path):
        o = ChainOutline(
            points=[Point(3, 4), Point(4, 4)], method="approach1", threshold=120, scale=2
        )
        d = outline_to_dict(o)
        assert d["points"] == [[3, 4], [4, 4]]
        back = outline_from_dict(d)
        assert back.points == o.points and back.threshold == 120

        path = tmp_path / "o.json"
        write_outline_json(o, path)
        import json

        assert json.loads(path.read_text())["method"] == "approach1"

    def test_xy_format(self, tmp_path):
        o = ChainOutline(points=[Point(3, 4), Point(4, 4)])
        path = tmp_path / "o.txt"
        write_outline_xy(o, path)
        assert path.read_text() == "3 4\n4 4\n"

    def test_minimum_length_enforced(self):
        with pytest.raises(ValueError):
            ChainOutline(points=[Point(0, 0)])
