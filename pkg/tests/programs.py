"""Seeded generators of valid experiment programs and token-level mutations."""

import random

from eprworlds.lhv import STRATEGIES


def _deg(rnd, hi=180.0):
    return rnd.choice([str(rnd.randint(0, int(hi))), f"{rnd.uniform(0, hi):.6g}", "0", "90", "45.5"])


def _az(rnd):
    return rnd.choice(["0", "90", f"{rnd.uniform(-720, 720):.5g}", "1e1"])


def valid_program(rnd: random.Random) -> str:
    lines = []
    if rnd.random() < 0.3:
        lines.append("# generated experiment")
    lines.append(f"singlet axis {_deg(rnd)} {_az(rnd)}")
    order = rnd.sample([1, 2], 2)
    n_measure = rnd.choice([0, 1, 2, 2, 2])
    random_axis = n_measure == 2 and rnd.random() < 0.2
    for dev in order[:n_measure]:
        if random_axis and dev == order[1]:
            lines.append(f"measure {dev} random seed {rnd.randint(0, 10**6)}")
        else:
            lines.append(f"  measure   {dev} axis {_deg(rnd)} {_az(rnd)}   # device {dev}")
    compared = n_measure == 2 and rnd.random() < 0.7
    if compared:
        lines.append("compare")
    kinds = ["bell", "thetascan"]
    if n_measure == 2 and not random_axis:
        kinds += ["correlation", "lhv"]
        if compared:
            kinds.append("worlds")
    chosen = [rnd.choice(kinds) for _ in range(rnd.randint(0, 4))]
    if random_axis:
        chosen.append("thetascan")
    for kind in chosen:
        if kind == "worlds":
            lines.append(f"analyze worlds maxden {rnd.randint(1, 1000)}")
        elif kind == "correlation":
            lines.append("analyze correlation")
        elif kind == "bell":
            lines.append("analyze bell " + " ".join(f"{_deg(rnd)} {_az(rnd)}" for _ in range(3)))
        elif kind == "lhv":
            name = rnd.choice(sorted(STRATEGIES))
            lines.append(f"analyze lhv {name} samples {rnd.randint(1, 500)} seed {rnd.randint(0, 99)}")
        else:
            lines.append(f"analyze thetascan {_deg(rnd)} {_deg(rnd)} {rnd.randint(2, 7)}")
    if rnd.random() < 0.3:
        lines.insert(rnd.randrange(len(lines) + 1), "")
    return "\n".join(lines) + "\n"


_JUNK = [
    "singlet", "measure", "compare", "analyze", "axis", "random", "seed", "worlds", "maxden", "bell",
    "lhv", "thetascan", "correlation", "samples", "1", "2", "3", "-1", "0", "1e999", "nan", "inf",
    "180.1", "90", "#", "sgn", "bohm", "x", "", "0x10", "1.5", "--", "\t", "é", "99999999999999999999999",
]


def mutate(program: str, rnd: random.Random) -> str:
    lines = program.splitlines()
    tokens = [(i, j) for i, line in enumerate(lines) for j, _ in enumerate(line.split())]
    op = rnd.choice(["delete", "duplicate", "replace", "insert", "swap_lines", "drop_line", "dup_line"])
    if op in ("swap_lines", "drop_line", "dup_line") or not tokens:
        if not lines:
            return rnd.choice(_JUNK)
        i = rnd.randrange(len(lines))
        if op == "swap_lines":
            k = rnd.randrange(len(lines))
            lines[i], lines[k] = lines[k], lines[i]
        elif op == "drop_line":
            del lines[i]
        else:
            lines.insert(i, lines[i])
        return "\n".join(lines)
    i, j = rnd.choice(tokens)
    words = lines[i].split()
    if op == "delete":
        del words[j]
    elif op == "duplicate":
        words.insert(j, words[j])
    elif op == "replace":
        words[j] = rnd.choice(_JUNK)
    else:
        words.insert(j, rnd.choice(_JUNK))
    lines[i] = " ".join(words)
    return "\n".join(lines)
