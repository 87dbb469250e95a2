import zipfile
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from musnet import (ChordSequence, DomainError, PitchClassSet, ScoreParseError, corpus_analyze,
                    operator_distribution, read_score, score_dictionary, score_network)
from musnet.graphstats import average_degree, louvain
from musnet.score import format_chord_text, parse_chord_text, parse_musicxml, write_chord_sequence

HEAD = '<?xml version="1.0"?><score-partwise version="3.1"><part-list>{parts}</part-list>'


def note(step, octave, dur, alter=0, chord=False, tie=None, voice=1, extra=""):
    ties = "".join(f'<tie type="{t}"/>' for t in (tie or []))
    return (f"<note>{'<chord/>' if chord else ''}<pitch><step>{step}</step>"
            f"{f'<alter>{alter}</alter>' if alter else ''}<octave>{octave}</octave></pitch>"
            f"<duration>{dur}</duration>{ties}<voice>{voice}</voice>{extra}</note>")


def rest(dur):
    return f"<note><rest/><duration>{dur}</duration></note>"


def score(*parts, divisions=1):
    ids = [f"P{i}" for i in range(1, len(parts) + 1)]
    head = HEAD.format(parts="".join(f'<score-part id="{p}"><part-name>x</part-name></score-part>' for p in ids))
    body = ""
    for pid, measures in zip(ids, parts):
        body += f'<part id="{pid}">'
        for k, m in enumerate(measures, 1):
            attrs = f"<attributes><divisions>{divisions}</divisions></attributes>" if k == 1 else ""
            body += f'<measure number="{k}">{attrs}{m}</measure>'
        body += "</part>"
    return head + body + "</score-partwise>"


def chords(xml, **kw):
    return [c.pitches for c in parse_musicxml(xml, **kw).chords]


def test_whole_note_triad():
    xml = score([note("C", 4, 4) + note("E", 4, 4, chord=True) + note("G", 4, 4, chord=True)])
    assert chords(xml) == [(0, 4, 7)]


def test_two_voices_over_a_sustained_note():
    upper = [note("C", 5, 2) + note("D", 5, 2)]
    lower = [note("G", 3, 4)]
    assert chords(score(upper, lower)) == [(0, 7), (2, 7)]


def test_backup_and_voices_in_one_part():
    m = note("C", 5, 2) + note("D", 5, 2) + "<backup><duration>4</duration></backup>" + note("G", 3, 4, voice=2)
    assert chords(score([m])) == [(0, 7), (2, 7)]


def test_rests_are_excluded_and_forward_shifts_time():
    m = note("C", 4, 1) + rest(1) + note("E", 4, 1) + "<forward><duration>1</duration></forward>"
    assert chords(score([m])) == [(0,), (4,)]


def test_ties_merge_into_one_sustain():
    upper = [note("E", 5, 4, tie=["start"]), note("E", 5, 4, tie=["stop"])]
    lower = [note("C", 4, 4), note("C", 4, 4)]
    # the lower voice restrikes but the sounding set does not change
    assert chords(score(upper, lower)) == [(0, 4), (0, 4)]
    upper = [note("E", 5, 2) + note("F", 5, 2, tie=["start"]), note("F", 5, 2, tie=["stop"]) + note("G", 5, 2)]
    lower = [note("C", 4, 4), note("C", 4, 4)]
    assert chords(score(upper, lower)) == [(0, 4), (0, 5), (0, 5), (0, 7)]


def test_alterations_and_temperament():
    xml = score([note("F", 4, 1, alter=1) + note("B", 4, 1, alter=-1) + note("C", 4, 1, alter=0.5)])
    assert chords(xml) == [(6,), (10,), (0,)]
    assert chords(xml, tet=24) == [(12,), (20,), (1,)]


def test_grace_and_unpitched_are_skipped(caplog):
    m = (note("C", 4, 1) + '<note><grace/><pitch><step>D</step><octave>4</octave></pitch></note>'
         + '<note><unpitched><display-step>E</display-step><display-octave>4</display-octave></unpitched>'
           '<duration>1</duration></note>' + note("E", 4, 1))
    with caplog.at_level("WARNING"):
        assert chords(score([m])) == [(0,), (4,)]
    assert "grace" in caplog.text and "unpitched" in caplog.text


def test_min_duration_filter():
    upper = [note("C", 5, 3) + note("D", 5, 1)]
    lower = [note("G", 3, 4)]
    assert chords(score(upper, lower, divisions=1), min_duration=2) == [(0, 7)]


def test_parse_errors_carry_a_location():
    with pytest.raises(ScoreParseError, match=r":1:\d+"):
        parse_musicxml("<score-partwise><part></score-partwise>")
    with pytest.raises(ScoreParseError, match="score-partwise"):
        parse_musicxml("<score-timewise/>")
    with pytest.raises(ScoreParseError, match="bad step"):
        parse_musicxml(score(["<note><pitch><step>H</step><octave>4</octave></pitch><duration>1</duration></note>"]))


def test_read_score_formats(tmp_path):
    xml = score([note("C", 4, 4) + note("E", 4, 4, chord=True)])
    (tmp_path / "a.xml").write_text(xml)
    with zipfile.ZipFile(tmp_path / "a.mxl", "w") as z:
        z.writestr("META-INF/container.xml",
                   '<container><rootfiles><rootfile full-path="inner/a.xml"/></rootfiles></container>')
        z.writestr("inner/a.xml", xml)
    (tmp_path / "a.txt").write_text("# tet: 12\n0,4; 0 4\n")
    for name in ("a.xml", "a.mxl", "a.txt"):
        seq = read_score(tmp_path / name)
        assert seq.chords[0].pitches == (0, 4) and seq.source_id == "a"
    with pytest.raises(ScoreParseError):
        read_score(tmp_path / "missing.xml")
    (tmp_path / "bad.mxl").write_bytes(b"not a zip")
    with pytest.raises(ScoreParseError):
        read_score(tmp_path / "bad.mxl")


def test_plain_text_format():
    seq = parse_chord_text("# tet: 24\n# a comment\n0,8,14; 2 10 16\n\n0,8,14 # trailing\n")
    assert seq.tet == 24 and [c.pitches for c in seq.chords] == [(0, 8, 14), (2, 10, 16), (0, 8, 14)]
    with pytest.raises(ScoreParseError, match=":2:"):
        parse_chord_text("0,4\n0,x\n")


chord_st = st.integers(1, 24).flatmap(
    lambda tet: st.lists(st.sets(st.integers(0, tet - 1), min_size=1).map(
        lambda s: PitchClassSet(s, tet=tet)), min_size=1, max_size=12).map(lambda cs: (tet, cs)))


@given(chord_st, st.sampled_from(["", "bwv1", "piece one"]))
def test_plain_text_round_trip(tc, source):
    tet, cs = tc
    seq = ChordSequence(cs, source, tet)
    assert parse_chord_text(format_chord_text(seq)) == seq


def test_golden_chord_sequences(fixtures):
    for name in ("bwv66.6", "schoenberg_op19_6"):
        got = read_score(fixtures / "scores" / f"{name}.mxl")
        frozen = read_score(fixtures / "scores" / f"{name}.chords.txt")
        assert got.chords == frozen.chords


def seq(*cs, tet=12):
    return ChordSequence([PitchClassSet(c, tet=tet) for c in cs], "t", tet)


X, Y = [0, 4, 7], [7, 11, 2]


def test_score_network_counts():
    net = score_network(seq(X, Y, X, Y))
    assert net.directed and net.n_nodes == 2
    counts = {(net.node(e.source).form, net.node(e.target).form): e.count for e in net.edges}
    assert counts == {((0, 4, 7), (2, 7, 11)): 2, ((2, 7, 11), (0, 4, 7)): 1}
    assert all(e.weight == e.count and e.operator == "O(1,2)" and e.distance2 == 5 for e in net.edges)


def test_repeats_collapse_by_default():
    s = seq(X, X, Y, Y, X)
    assert score_network(s).n_edges == 2
    kept = score_network(s, keep_repeats=True)
    assert kept.n_edges == 4 and kept.has_edge(0, 0)
    assert operator_distribution(seq(X, X, X), keep_repeats=True).counts == {"O()": 2}


def test_total_edge_count_equals_transitions():
    s = seq(X, Y, [0, 3, 7], X, [0, 4], Y, X)
    net = score_network(s)
    assert sum(e.count for e in net.edges) == len(s.transitions()) == 6
    h = operator_distribution(s)
    assert h.total == 6 and sum(h.counts.values()) == 6
    assert sum(h.probabilities().values()) == pytest.approx(1.0)


def test_operator_distribution_examples():
    h = operator_distribution(seq(X, Y, X))
    assert h.counts == {"O(1,2)": 2}
    assert h.coverage(["O(1,2)"]) == 1.0
    # cardinality changes go through the non-bijective distance
    h = operator_distribution(seq([0, 4, 7], [0, 4, 7, 10]))
    assert h.counts == {"O(2)": 1}


def test_loop_gives_ring():
    ring = seq([0], [1], [2], [3], [4], [0])
    net = score_network(ring)
    assert net.n_nodes == 5 and net.n_edges == 5
    assert all(net.degree(i) == 2 for i in net.node_ids())


def test_score_dictionary():
    d = score_dictionary(seq(X, Y, X, [0, 4]))
    assert [e.form for e in d] == [(0, 4), (0, 4, 7), (2, 7, 11)]
    assert [e.extra["count"] for e in d] == [1, 2, 1]
    assert d[1].descriptor == (0, 0, 1, 1, 1, 0)
    assert len(score_dictionary(seq(X, X, X))) == 1
    with pytest.raises(DomainError):
        score_network(seq(X))


def write_seq(path, *cs):
    write_chord_sequence(seq(*cs), path)
    return str(path)


def test_corpus_single_piece_equals_piece(tmp_path):
    p = write_seq(tmp_path / "a.txt", X, Y, [0, 3, 7], X)
    rep = corpus_analyze([p])
    net = score_network(read_score(p))
    assert rep.network == net
    assert rep.mean_degree == average_degree(net)
    assert rep.mean_modularity == pytest.approx(louvain(net).modularity)
    assert rep.histogram == operator_distribution(read_score(p))


def test_corpus_disjoint_union_and_failures(tmp_path):
    a = write_seq(tmp_path / "a.txt", X, Y, X)
    b = write_seq(tmp_path / "b.txt", [1, 5], [2, 6], [3, 7])
    (tmp_path / "broken.xml").write_text("<score-partwise><part>")
    rep = corpus_analyze([b, str(tmp_path / "broken.xml"), a], workers=2)
    assert [p.source_id for p in rep.pieces] == ["a", "b"]
    assert len(rep.failures) == 1 and "broken" in rep.failures[0][0]
    na, nb = score_network(read_score(a)), score_network(read_score(b))
    assert rep.network.n_nodes == na.n_nodes + nb.n_nodes
    assert rep.network.n_edges == na.n_edges + nb.n_edges
    assert rep.histogram.total == 2 + 2
    with pytest.raises(DomainError):
        corpus_analyze([str(tmp_path / "broken.xml")])


def test_corpus_merges_counts(tmp_path):
    a = write_seq(tmp_path / "a.txt", X, Y)
    b = write_seq(tmp_path / "b.txt", X, Y, X)
    rep = corpus_analyze([a, b])
    counts = Counter({(e.source, e.target): e.count for e in rep.network.edges})
    assert sorted(counts.values()) == [1, 2]
