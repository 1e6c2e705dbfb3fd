import numpy as np
import pytest
import torch

from mdtnet.core import ShapeError, ValidationError
from mdtnet.data import DEFAULT_STYLES, NEUTRAL_STYLE, generate_synthetic
from mdtnet.metrics import boundary_f1, boundary_map, edge_map, structural_consistency


@pytest.fixture(scope="module")
def clean():
    return generate_synthetic(11, NEUTRAL_STYLE, 6, (64, 64))


def test_clean_render_matches_its_masks(clean):
    score = structural_consistency(
        [s.structure_mask for s in clean],
        torch.stack([s.image for s in clean]),
        [s.fluid_mask for s in clean],
    )
    assert score >= 0.8


def test_constant_image_scores_near_zero(clean):
    flat = torch.full((len(clean), 1, 64, 64), 0.5)
    assert structural_consistency([s.structure_mask for s in clean], flat) < 0.1


def test_other_geometry_scores_lower(clean):
    other = generate_synthetic(12, NEUTRAL_STYLE, 6, (64, 64))
    masks = [s.structure_mask for s in clean]
    own = structural_consistency(masks, torch.stack([s.image for s in clean]))
    foreign = structural_consistency(masks, torch.stack([s.image for s in other]))
    assert foreign < own


def test_permutation_equivariant(clean):
    masks = [s.structure_mask for s in clean]
    images = [s.image[0].numpy() for s in generate_synthetic(11, DEFAULT_STYLES[2], 6, (64, 64))]
    order = [3, 0, 5, 1, 4, 2]
    forward = structural_consistency(masks, images)
    shuffled = structural_consistency([masks[i] for i in order], [images[i] for i in order])
    assert shuffled == pytest.approx(forward, abs=1e-12)


def test_boundary_map_marks_label_changes():
    labels = np.zeros((4, 4), dtype=np.int64)
    labels[2:] = 1
    boundary = boundary_map(labels)
    assert boundary[1].all()
    assert not boundary[[0, 2, 3]].any()

    fluid = np.zeros((4, 4), dtype=bool)
    fluid[3, 3] = True
    with_fluid = boundary_map(labels, fluid)
    assert with_fluid[2, 3] and with_fluid[3, 2]


def test_boundary_f1_edge_cases():
    empty = np.zeros((8, 8), dtype=bool)
    line = empty.copy()
    line[4] = True
    assert boundary_f1(empty, empty) == 1.0
    assert boundary_f1(empty, line) == 0.0
    assert boundary_f1(line, empty) == 0.0
    shifted = np.roll(line, 1, axis=0)
    assert boundary_f1(shifted, line) == 1.0
    assert boundary_f1(np.roll(line, 3, axis=0), line) == 0.0


def test_edge_map_finds_a_step():
    image = np.zeros((32, 32))
    image[16:] = 1.0
    edges = edge_map(image)
    rows = np.unique(np.nonzero(edges)[0])
    assert set(rows.tolist()) <= {15, 16}


def test_argument_errors(clean):
    masks = [s.structure_mask for s in clean]
    with pytest.raises(ValidationError):
        structural_consistency(masks, torch.zeros(2, 1, 64, 64))
    with pytest.raises(ValidationError):
        structural_consistency([], [])
    with pytest.raises(ShapeError):
        structural_consistency(masks[:1], torch.zeros(1, 1, 32, 32))
