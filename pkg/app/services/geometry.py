"""
Chamber geometry - building-walls, dials, separation and gallery images

A building-wall of type s is named by s together with the canonical (shortest)
representative of the coset delta * Gamma_star(s) of any chamber next to it.
Dials of a wall are numbered from that representative, which sits in dial 0.
"""

import json
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, FrozenSet, List, Optional, Tuple

from app.services.errors import GalleryError, InvariantViolation, NotAdjacentError
from app.services.presentation import INF
from app.services.words import Chamber, Gallery, NormalForm, WordEngine, shortlex_key

if TYPE_CHECKING:
    from app.services.oracle import Ball
    from app.services.parabolic import SectorRef

logger = logging.getLogger(__name__)

DialIndex = int


@dataclass(frozen=True)
class WallId:
    """Building-wall of type `type` through the panel of type `type` at chamber `rep`"""
    type: int
    rep: NormalForm


def wall_key(wall: WallId):
    return (shortlex_key(wall.rep), wall.type)


class ChamberGeometry:
    """Wall and dial computations in the chamber system of a graph product"""

    def __init__(self, engine: WordEngine):
        self.engine = engine
        self.spec = engine.spec

    def wall_of(self, x: Chamber, s: int) -> WallId:
        """The wall of type s bounding the s-panel of chamber x"""
        rep, _ = self.engine.right_coset_minimize(x, self.spec.star(s))
        return WallId(s, rep)

    def wall_between(self, x: Chamber, y: Chamber) -> WallId:
        witness = self.engine.adjacency_witness(x, y)
        if witness is None:
            raise NotAdjacentError(
                f"{self.engine.format_word(x)} and {self.engine.format_word(y)} are not adjacent chambers")
        return self.wall_of(x, witness.gen)

    def dial_index(self, wall: WallId, x: Chamber) -> DialIndex:
        local = self.engine.multiply(self.engine.invert(wall.rep), x)
        prefix, _ = self.engine.i_prefix(local, self.spec.star(wall.type))
        alpha = sum(s.exp for s in prefix.syllables if s.gen == wall.type)
        order = self.spec.order(wall.type)
        return alpha if order == INF else alpha % order

    def separates(self, wall: WallId, x: Chamber, y: Chamber) -> bool:
        return self.dial_index(wall, x) != self.dial_index(wall, y)

    def crossed_walls(self, gallery: Gallery) -> List[WallId]:
        return [self.wall_of(gallery.chambers[k], step.gen) for k, step in enumerate(gallery.steps)]

    def separating_walls(self, x: Chamber, y: Chamber) -> FrozenSet[WallId]:
        walls = self.crossed_walls(self.engine.minimal_gallery(x, y))
        unique = frozenset(walls)
        if len(unique) != len(walls):
            raise InvariantViolation("A minimal gallery crossed the same wall twice")
        return unique

    def is_minimal(self, gallery: Gallery) -> bool:
        walls = self.crossed_walls(gallery)
        by_walls = len(set(walls)) == len(walls)
        by_metric = len(gallery) == self.engine.distance(gallery.start, gallery.end)
        if by_walls != by_metric:
            raise InvariantViolation(
                f"Wall count and metric disagree on minimality (walls={by_walls}, metric={by_metric})")
        return by_walls

    def crosses_sector(self, wall: WallId, sector: 'SectorRef') -> bool:
        if wall.type not in sector.types:
            return False
        relative = self.engine.multiply(self.engine.invert(sector.base), wall.rep)
        _, core, _ = self.engine.double_coset_minimize(relative, sector.types, self.spec.star(wall.type))
        return core.is_identity

    def gallery_image(self, gallery: Gallery, sector: 'SectorRef') -> Gallery:
        """Projection of a minimal gallery onto a sector, repetitions omitted"""
        if not self.is_minimal(gallery):
            raise GalleryError("Gallery images are only defined for minimal galleries")
        images: List[Chamber] = []
        for chamber in gallery.chambers:
            image = self.engine.project_to_sector(chamber, sector)
            if not images or images[-1] != image:
                images.append(image)
        try:
            result = self.engine.gallery(images)
        except GalleryError as e:
            logger.error(f"Consecutive projections are not adjacent: {e}")
            raise InvariantViolation(f"Projected chambers are not adjacent: {e}")
        if not self.is_minimal(result):
            raise InvariantViolation("Gallery image is not minimal")
        return result

    # -- rotations ---------------------------------------------------------

    def rotation(self, wall: WallId, exponent: int = 1) -> NormalForm:
        """delta s^alpha delta^-1, a rotation around the wall"""
        return self.engine.conjugate(wall.rep, self.engine.element(wall.type, exponent))

    def rotate(self, wall: WallId, exponent: int, x: Chamber) -> Chamber:
        return self.engine.multiply(self.rotation(wall, exponent), x)

    def wall_translate(self, g: NormalForm, wall: WallId) -> WallId:
        """Canonical name of the image g(M) of a wall"""
        return self.wall_of(self.engine.multiply(g, wall.rep), wall.type)

    def wall_is_nontrivial(self, wall: WallId) -> bool:
        link = self.spec.link(wall.type)
        return len(link) > 1 and self.spec.graph().subgraph(link).number_of_edges() > 0

    # -- text and export ---------------------------------------------------

    def parse_wall(self, text: str) -> WallId:
        """'<type>,<rep word>'; any chamber of the panel may be given as rep"""
        type_name, _, rep_text = text.partition(',')
        s = self.spec.index(type_name.strip())
        return self.wall_of(self.engine.parse_word(rep_text or 'e'), s)

    def format_wall(self, wall: WallId) -> str:
        return f"{self.spec.name(wall.type)},{self.engine.format_word(wall.rep)}"

    def export_ball(self, ball: 'Ball', fmt: str = 'dot', wall: Optional[WallId] = None) -> str:
        """Chamber-graph ball as DOT or JSON, vertices in ShortLex order"""
        graph = ball.graph()
        vertices = sorted(graph.nodes, key=shortlex_key)
        ids = {chamber: k for k, chamber in enumerate(vertices)}
        edges = []
        for u, v in graph.edges():
            src, dst = (u, v) if ids[u] < ids[v] else (v, u)
            step = self.engine.adjacency_witness(src, dst)
            edges.append((ids[src], ids[dst], self.spec.name(step.gen), step.exp))
        labels = [self.engine.format_word(c) for c in vertices]
        dials = [self.dial_index(wall, c) for c in vertices] if wall is not None else None
        return render_graph(labels, [len(c) for c in vertices], sorted(edges), fmt, dials)


def render_graph(labels: List[str], lengths: List[int], edges: List[Tuple[int, int, str, int]],
                 fmt: str = 'dot', dials: Optional[List[int]] = None) -> str:
    """DOT or JSON text for a labelled graph whose vertex ids are list positions"""
    if fmt == 'json':
        vertices = []
        for k, (label, length) in enumerate(zip(labels, lengths)):
            vertex = {'id': k, 'word': label, 'len': length}
            if dials is not None:
                vertex['dial'] = dials[k]
            vertices.append(vertex)
        payload = {
            'vertices': vertices,
            'edges': [{'src': src, 'dst': dst, 'type': type_name, 'exp': exp}
                      for src, dst, type_name, exp in edges],
        }
        return json.dumps(payload, indent=2)
    if fmt != 'dot':
        raise ValueError(f"Unknown export format {fmt!r}, expected 'dot' or 'json'")

    lines = ['graph chambers {']
    for k, label in enumerate(labels):
        attributes = f'label="{label}"'
        if dials is not None:
            attributes += f', colorscheme=set19, color={dials[k] % 9 + 1}, xlabel="{dials[k]}"'
        lines.append(f'  v{k} [{attributes}];')
    for src, dst, type_name, exp in edges:
        lines.append(f'  v{src} -- v{dst} [label="{type_name}^{exp}"];')
    lines.append('}')
    return '\n'.join(lines)
