import numpy as np
import pytest

from mnlpm import (
    MultilayerNetwork,
    NetworkParseError,
    NetworkValidationError,
    apply_fold_mask,
    erdos_renyi,
    load_mask,
    load_network,
    make_folds,
    save_network,
    validate,
)


def triangle_net(J=2):
    adj = np.zeros((3, 3, J), dtype=np.uint8)
    for j in range(J):
        for i, i2 in ((0, 1), (1, 2), (0, 2)):
            adj[i, i2, j] = adj[i2, i, j] = 1
    return MultilayerNetwork(adj, None)


class TestValidation:
    def test_valid_network_has_no_violations(self):
        assert validate(triangle_net()) == []

    def test_nonzero_diagonal_named(self):
        adj = np.zeros((3, 3, 1), dtype=np.uint8)
        adj[1, 1, 0] = 1
        msgs = validate((adj, None))
        assert any("(1, 1, 0)" in m for m in msgs)

    def test_asymmetry_named(self):
        adj = np.zeros((3, 3, 1), dtype=np.uint8)
        adj[0, 2, 0] = 1
        msgs = validate((adj, None))
        assert any("(0, 2, 0)" in m for m in msgs)

    def test_non_binary_entry_named(self):
        adj = np.zeros((3, 3, 1), dtype=np.int64)
        adj[0, 1, 0] = adj[1, 0, 0] = 7
        msgs = validate((adj, None))
        assert any("non-binary" in m for m in msgs)

    def test_constructor_rejects_invalid(self):
        adj = np.zeros((3, 3, 1), dtype=np.uint8)
        adj[0, 1, 0] = 1  # asymmetric
        with pytest.raises(NetworkValidationError):
            MultilayerNetwork(adj, None)

    def test_adjacency_is_read_only(self):
        net = triangle_net()
        with pytest.raises(ValueError):
            net.adjacency[0, 1, 0] = 0


class TestEdgeListFormat:
    def test_round_trip(self, tmp_path):
        net = erdos_renyi(9, 3, 0.4, seed=5)
        path = tmp_path / "net.edges"
        save_network(net, path)
        loaded = load_network(path)
        assert np.array_equal(loaded.adjacency, net.adjacency)

    def test_comments_and_duplicates_tolerated(self, tmp_path):
        path = tmp_path / "net.edges"
        path.write_text("3 1\n% comment line\n1 1 2\n1 2 1\n1 1 2\n")
        net = load_network(path)
        assert net.edge_count(0) == 1
        assert net.adjacency[0, 1, 0] == 1

    def test_actor_metadata(self, tmp_path):
        path = tmp_path / "net.edges"
        path.write_text("3 1\n# actor 2 alice role=lead\n1 1 2\n")
        net = load_network(path)
        assert net.actor_labels[1] == "alice"
        assert net.actor_attributes[1] == {"role": "lead"}

    @pytest.mark.parametrize("text", [
        "",                       # empty
        "3\n",                    # bad header
        "3 1\n1 1\n",             # short data line
        "3 1\n1 1 4\n",           # index out of range
        "3 1\n2 1 2\n",           # layer out of range
        "3 1\n1 2 2\n",           # self loop
        "3 1\nx 1 2\n",           # non-integer
        "3 1\n# wrong meta\n",    # bad metadata
    ])
    def test_malformed_rejected(self, tmp_path, text):
        path = tmp_path / "bad.edges"
        path.write_text(text)
        with pytest.raises(NetworkParseError):
            load_network(path)


class TestAdjacencyFormat:
    def test_round_trip(self, tmp_path):
        net = erdos_renyi(6, 2, 0.5, seed=3)
        path = tmp_path / "net.adj"
        save_network(net, path, format="adjacency-matrix")
        loaded = load_network(path, format="adjacency-matrix")
        assert np.array_equal(loaded.adjacency, net.adjacency)

    def test_wrong_row_count(self, tmp_path):
        path = tmp_path / "bad.adj"
        path.write_text("2 1\n0 1\n")
        with pytest.raises(NetworkParseError):
            load_network(path, format="adjacency-matrix")


class TestMask:
    def test_mask_file_marks_missing(self, tmp_path):
        net = triangle_net(J=2)
        path = tmp_path / "mask.edges"
        path.write_text("3 2\n1 1 2\n2 2 3\n")
        masked = load_mask(net, path)
        assert not masked.mask[0, 1, 0] and not masked.mask[1, 0, 0]
        assert not masked.mask[1, 2, 1]
        assert masked.mask[0, 1, 1]
        # adjacency untouched
        assert np.array_equal(masked.adjacency, net.adjacency)

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "mask.edges"
        path.write_text("4 2\n1 1 2\n")
        with pytest.raises(NetworkParseError):
            load_mask(triangle_net(), path)


class TestGenerators:
    def test_erdos_renyi_structure(self):
        net = erdos_renyi(12, 3, 0.3, seed=1)
        assert validate(net) == []

    def test_erdos_renyi_seeded(self):
        a = erdos_renyi(10, 2, 0.4, seed=9)
        b = erdos_renyi(10, 2, 0.4, seed=9)
        assert np.array_equal(a.adjacency, b.adjacency)

    def test_extreme_probabilities(self):
        assert erdos_renyi(6, 1, 0.0, seed=0).edge_count() == 0
        assert erdos_renyi(6, 1, 1.0, seed=0).edge_count() == 15

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            erdos_renyi(5, 1, 1.5)


class TestFolds:
    def test_partition_and_balance(self):
        net = erdos_renyi(10, 2, 0.5, seed=2)
        folds = make_folds(net, 5, seed=0)
        sizes = folds.fold_sizes()
        assert sum(sizes) == len(net.observed_triples())
        assert max(sizes) - min(sizes) <= 1

    def test_seeded_determinism(self):
        net = erdos_renyi(8, 2, 0.5, seed=2)
        a = make_folds(net, 4, seed=3).fold_of_dyad
        b = make_folds(net, 4, seed=3).fold_of_dyad
        assert a == b

    def test_apply_fold_mask(self):
        net = erdos_renyi(8, 2, 0.5, seed=2)
        folds = make_folds(net, 4, seed=3)
        masked = apply_fold_mask(net, folds, 1)
        held = set(folds.triples_in_fold(1))
        for (i, i2, j) in held:
            assert not masked.mask[i, i2, j] and not masked.mask[i2, i, j]
        # exactly the held-out fold is hidden
        n_hidden = (~masked.mask[np.triu_indices(8, k=1)]).sum()
        assert n_hidden == len(held)

    def test_too_many_folds(self):
        net = triangle_net(J=1)
        with pytest.raises(ValueError):
            make_folds(net, 10)


class TestHelpers:
    def test_counts_and_density(self):
        net = triangle_net(J=2)
        assert net.n_dyads == 3
        assert net.edge_count(0) == 3
        assert net.density(0) == 1.0
        assert net.edge_count() == 6

    def test_observed_triples_lexicographic(self):
        net = triangle_net(J=2)
        triples = net.observed_triples()
        assert triples.shape == (6, 3)
        assert [tuple(t) for t in triples[:3]] == [(0, 1, 0), (0, 2, 0), (1, 2, 0)]

    def test_relabeled_preserves_edges(self):
        net = erdos_renyi(7, 2, 0.4, seed=8)
        perm = np.array([3, 1, 0, 6, 2, 5, 4])
        rel = net.relabeled(perm)
        assert rel.edge_count() == net.edge_count()
        assert rel.adjacency[0, 1, 0] == net.adjacency[3, 1, 0]
