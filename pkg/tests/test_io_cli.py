import os
import random
import subprocess
import sys

import pytest

from setiso import fileio
from setiso.graphs import ColoredGraph
from setiso.hfs import HfsTerm
from setiso.perm import PermGroup, Permutation
from setiso.pstrings import Hypergraph, PPartition, PString, make_family
from setiso.strings import ColoredString

from util import rand_perm


def run_cli(args, env_threads=None):
    env = dict(os.environ)
    if env_threads is not None:
        env["SETISO_THREADS"] = str(env_threads)
    proc = subprocess.run([sys.executable, "-m", "setiso.cli"] + args,
                          capture_output=True, text=True, env=env)
    return proc.returncode, proc.stdout, proc.stderr


class TestRoundTrips:
    def test_group(self, tmp_path):
        path = str(tmp_path / "g.grp")
        group = PermGroup([Permutation([1, 0, 2, 3]), Permutation([1, 2, 3, 0])], 4)
        fileio.write_group(path, group)
        back = fileio.read_group(path)
        assert back.order() == group.order()
        assert back.generators == group.generators

    def test_string(self, tmp_path):
        path = str(tmp_path / "x.str")
        s = ColoredString((0, 2, 1, 1))
        fileio.write_string(path, s)
        assert fileio.read_string(path) == s

    def test_hypergraph(self, tmp_path):
        path = str(tmp_path / "h.hg")
        h = Hypergraph(4, frozenset({frozenset({0, 1}), frozenset({1, 2, 3})}))
        fileio.write_hypergraph(path, h)
        assert fileio.read_hypergraph(path) == h

    def test_family(self, tmp_path):
        path = str(tmp_path / "f.psf")
        part = PPartition.from_classes(4, [[0, 1], [2, 3]])
        fam = make_family(part, [PString(0, (1, 2)), PString(1, (0, 0))])
        fileio.write_family(path, fam)
        back = fileio.read_family(path)
        assert back.key() == fam.key()

    def test_colored_graph(self, tmp_path):
        path = str(tmp_path / "g.cg")
        arcs = {(0, 1): 3, (1, 0): 4, (1, 2): 0, (2, 1): 0}
        g = ColoredGraph.build(3, arcs, [5, 6, 7])
        fileio.write_colored_graph(path, g)
        assert fileio.read_colored_graph(path) == g

    def test_hfs(self, tmp_path):
        path = str(tmp_path / "t.hfs")
        term = HfsTerm.make_tuple([
            HfsTerm.make_set([HfsTerm.make_atom(0), HfsTerm.make_atom(1)]),
            HfsTerm.make_atom(2),
        ])
        fileio.write_hfs(path, 3, term)
        n, back = fileio.read_hfs(path)
        assert n == 3
        assert back == term

    def test_parse_error_carries_line(self, tmp_path):
        path = str(tmp_path / "bad.hg")
        path_obj = tmp_path / "bad.hg"
        path_obj.write_text("2 1\n2 0 7\n")
        with pytest.raises(fileio.ParseError) as err:
            fileio.read_hypergraph(path)
        assert err.value.line == 2


@pytest.fixture
def fixture_dir(tmp_path):
    rng = random.Random(11)
    # group file: S4
    fileio.write_group(str(tmp_path / "s4.grp"),
                       PermGroup([Permutation([1, 0, 2, 3]),
                                  Permutation([1, 2, 3, 0])], 4))
    # strings
    fileio.write_string(str(tmp_path / "a.str"), ColoredString((0, 0, 1, 1)))
    fileio.write_string(str(tmp_path / "b.str"), ColoredString((1, 0, 1, 0)))
    fileio.write_string(str(tmp_path / "c.str"), ColoredString((0, 0, 0, 1)))
    # hypergraphs: 4-cycle and a relabeling
    cyc = Hypergraph(4, frozenset(frozenset(e) for e in [(0, 1), (1, 2), (2, 3), (3, 0)]))
    fileio.write_hypergraph(str(tmp_path / "cyc.hg"), cyc)
    fileio.write_hypergraph(str(tmp_path / "cyc2.hg"), cyc.apply(Permutation([2, 0, 3, 1])))
    # colored graphs
    p3 = ColoredGraph.plain(4, [(0, 1), (1, 2), (2, 3)])
    fileio.write_colored_graph(str(tmp_path / "p3.cg"),
                               ColoredGraph.plain(3, [(0, 1), (1, 2)]))
    fileio.write_colored_graph(str(tmp_path / "path.cg"), p3)
    fileio.write_colored_graph(str(tmp_path / "path2.cg"), p3.apply(rand_perm(rng, 4)))
    k4 = ColoredGraph.plain(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    fileio.write_colored_graph(str(tmp_path / "k4.cg"), k4)
    fileio.write_colored_graph(str(tmp_path / "k4b.cg"), k4.apply(rand_perm(rng, 4)))
    # families
    part = PPartition.from_classes(4, [[0, 1], [2, 3]])
    fx = make_family(part, [PString(0, (1, 2)), PString(1, (0, 0))])
    fileio.write_family(str(tmp_path / "fx.psf"), fx)
    fileio.write_family(str(tmp_path / "fy.psf"), fx.apply(Permutation([1, 0, 3, 2])))
    # hfs
    term = HfsTerm.make_set([HfsTerm.make_atom(0), HfsTerm.make_atom(1)])
    fileio.write_hfs(str(tmp_path / "t1.hfs"), 3, term)
    fileio.write_hfs(str(tmp_path / "t2.hfs"), 3,
                     HfsTerm.make_set([HfsTerm.make_atom(1), HfsTerm.make_atom(2)]))
    return tmp_path


class TestCli:
    def test_iso_string(self, fixture_dir):
        code, out, _ = run_cli(["iso-string", "--machine",
                                str(fixture_dir / "a.str"), str(fixture_dir / "b.str")])
        assert code == 0
        assert out.splitlines()[0] == "ISO"

    def test_iso_string_group_restricted(self, fixture_dir):
        # under the trivial group, different strings cannot match
        fileio.write_group(str(fixture_dir / "triv.grp"), PermGroup([], 4))
        code, out, _ = run_cli(["iso-string", "--machine",
                                "--group", str(fixture_dir / "triv.grp"),
                                str(fixture_dir / "a.str"), str(fixture_dir / "b.str")])
        assert code == 1
        assert out.strip() == "NONISO"

    def test_iso_hyper_exit_codes(self, fixture_dir):
        code, out, _ = run_cli(["iso-hyper", "--machine",
                                "--group", str(fixture_dir / "s4.grp"),
                                str(fixture_dir / "cyc.hg"), str(fixture_dir / "cyc2.hg")])
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "ISO"
        assert lines[1].startswith("rep ")
        assert any(l.startswith("aut-order ") for l in lines)

    def test_iso_graph(self, fixture_dir):
        code, out, _ = run_cli(["iso-graph", "--machine",
                                str(fixture_dir / "path.cg"), str(fixture_dir / "path2.cg")])
        assert code == 0

    def test_iso_graph_noniso(self, fixture_dir):
        code, out, _ = run_cli(["iso-graph", "--machine",
                                str(fixture_dir / "path.cg"), str(fixture_dir / "k4.cg")])
        assert code == 1

    def test_iso_psf(self, fixture_dir):
        # the default full symmetric group does not respect the partition
        code, _, err = run_cli(["iso-psf", "--machine",
                                str(fixture_dir / "fx.psf"), str(fixture_dir / "fy.psf")])
        assert code == 2
        assert "invariant" in err
        fileio.write_group(str(fixture_dir / "pairs.grp"), PermGroup([
            Permutation([1, 0, 2, 3]), Permutation([0, 1, 3, 2]),
            Permutation([2, 3, 0, 1])], 4))
        code, out, _ = run_cli(["iso-psf", "--machine",
                                "--group", str(fixture_dir / "pairs.grp"),
                                str(fixture_dir / "fx.psf"), str(fixture_dir / "fy.psf")])
        assert code == 0

    def test_iso_hfs(self, fixture_dir):
        code, out, _ = run_cli(["iso-hfs", "--machine",
                                str(fixture_dir / "t1.hfs"), str(fixture_dir / "t2.hfs")])
        assert code == 0

    def test_iso_excluded_minor(self, fixture_dir):
        code, out, _ = run_cli(["iso-excluded-minor", "--h", "3", "--machine",
                                str(fixture_dir / "k4.cg"), str(fixture_dir / "k4b.cg")])
        assert code == 0
        assert "aut-order 24" in out

    def test_iso_genus(self, fixture_dir):
        code, out, _ = run_cli(["iso-genus", "--g", "0", "--machine",
                                str(fixture_dir / "k4.cg"), str(fixture_dir / "k4b.cg")])
        assert code == 0

    def test_refine_p3(self, fixture_dir):
        code, out, _ = run_cli(["refine", str(fixture_dir / "p3.cg")])
        assert code == 0
        assert out.splitlines()[0] == "classes 2"

    def test_normalize(self, fixture_dir):
        code, out, _ = run_cli(["normalize", "--d", "2",
                                "--group", str(fixture_dir / "s4.grp"),
                                str(fixture_dir / "fx.psf")])
        assert code == 2 or code == 0
        # S4 does not leave the pair partition invariant: expect an error
        assert code == 2

    def test_normalize_valid_group(self, fixture_dir):
        fileio.write_group(str(fixture_dir / "w.grp"), PermGroup([
            Permutation([1, 0, 2, 3]), Permutation([2, 3, 0, 1])], 4))
        code, out, _ = run_cli(["normalize", "--d", "2",
                                "--group", str(fixture_dir / "w.grp"),
                                str(fixture_dir / "fx.psf")])
        assert code == 0
        assert out.splitlines()[0] == "domain 4"

    def test_certify(self, fixture_dir, tmp_path):
        # wreath group on 10 points with a simple family
        gens = [
            Permutation.from_cycles(10, [0, 1]),
            Permutation.from_cycles(10, [0, 2], [1, 3]),
            Permutation.from_cycles(10, [0, 2, 4, 6, 8], [1, 3, 5, 7, 9]),
        ]
        fileio.write_group(str(tmp_path / "w10.grp"), PermGroup(gens, 10))
        part = PPartition.from_classes(10, [[2 * i, 2 * i + 1] for i in range(5)])
        fam = make_family(part, [PString(c, (0, 0)) for c in range(5)])
        fileio.write_family(str(tmp_path / "w.psf"), fam)
        code, out, _ = run_cli(["certify", "--d", "5",
                                "--group", str(tmp_path / "w10.grp"),
                                str(tmp_path / "w.psf"), str(tmp_path / "w.psf")])
        assert code == 0
        assert "giant-representation k=5" in out
        assert "first: full" in out

    def test_oracle(self, fixture_dir):
        code, out, _ = run_cli(["oracle", "--kind", "hyper",
                                "--group", str(fixture_dir / "s4.grp"),
                                str(fixture_dir / "cyc.hg"), str(fixture_dir / "cyc2.hg")])
        assert code == 0
        assert out.splitlines()[0] == "count 8"

    def test_parse_error_exit_2(self, fixture_dir):
        bad = fixture_dir / "bad.hg"
        bad.write_text("2 1\n2 0 7\n")
        code, out, err = run_cli(["iso-hyper", str(bad), str(bad)])
        assert code == 2
        assert "bad.hg:2" in err

    def test_genus_table(self):
        code, out, _ = run_cli(["genus-table", "--g", "1"])
        assert code == 0
        assert "h 7" in out
        assert "K_{3,3} genus 1" in out
        assert "K_{3,7} genus 2" in out

    def test_determinism_across_threads(self, fixture_dir):
        cmds = [
            ["iso-hyper", "--machine", "--group", str(fixture_dir / "s4.grp"),
             str(fixture_dir / "cyc.hg"), str(fixture_dir / "cyc2.hg")],
            ["iso-excluded-minor", "--h", "3", "--machine",
             str(fixture_dir / "k4.cg"), str(fixture_dir / "k4b.cg")],
        ]
        for cmd in cmds:
            outs = set()
            for threads in (1, 4):
                for _ in range(2):
                    code, out, _ = run_cli(cmd, env_threads=threads)
                    outs.add((code, out))
            assert len(outs) == 1
