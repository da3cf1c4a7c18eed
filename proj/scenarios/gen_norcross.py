#!/usr/bin/env python3
"""Regenerates norcross-b.model and norcross-c.model (120 agents each)."""
import os

N = 120
HERE = os.path.dirname(os.path.abspath(__file__))


def write(name, lines):
    path = os.path.join(HERE, name)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("wrote", path)


def norcross_b():
    out = [
        "# Many people, each suffering a certain mild headache if the event occurs.",
        "# Per-person harm is 0.01, so the raw sum overtakes one certain death",
        "# (norcross-a) once the head count passes 100. Utilities are illustrative",
        "# fixtures. Generated by gen_norcross.py; edit that script, not this file.",
        "",
        "[model]",
        "name: norcross-b",
        f"description: {N} certain headaches.",
        "",
        "[variables]",
        "E: endogenous {idle, occur}",
    ]
    out += [f"O_a{i}: endogenous {{fine, headache}}" for i in range(1, N + 1)]
    out += ["", "[equations]", "E := idle"]
    out += [f"O_a{i} := if E = occur then headache else fine" for i in range(1, N + 1)]
    out += ["", "[utility]"]
    for i in range(1, N + 1):
        out += [
            f"agent a{i} {{",
            f"  outcome: O_a{i}",
            "  default: 1",
            "  values: { fine: 1, headache: 0.99 }",
            "}",
        ]
    out += [
        "",
        "[weighting]",
        "kind: floor",
        "tau: 1/1000",
        "",
        "[policies]",
        "occur: E = occur",
        "refrain: E = idle",
    ]
    write("norcross-b.model", out)


def norcross_c():
    out = [
        "# Many people, each facing a one-in-a-million chance of death if the event",
        "# occurs. The risk is a single shared switch, so there are two contexts,",
        "# not 2^120. Utilities are illustrative fixtures. Generated by",
        "# gen_norcross.py; edit that script, not this file.",
        "",
        "[model]",
        "name: norcross-c",
        f"description: {N} one-in-a-million death risks.",
        "",
        "[variables]",
        "Z: exogenous {safe, disaster}",
        "E: endogenous {idle, occur}",
    ]
    out += [f"O_a{i}: endogenous {{alive, dead}}" for i in range(1, N + 1)]
    out += ["", "[equations]", "E := idle"]
    out += [
        f"O_a{i} := if E = occur and Z = disaster then dead else alive"
        for i in range(1, N + 1)
    ]
    out += [
        "",
        "[distribution]",
        "(Z = safe): 999999/1000000",
        "(Z = disaster): 1/1000000",
        "",
        "[utility]",
    ]
    for i in range(1, N + 1):
        out += [
            f"agent a{i} {{",
            f"  outcome: O_a{i}",
            "  default: 1",
            "  values: { alive: 1, dead: 0 }",
            "}",
        ]
    out += [
        "",
        "[weighting]",
        "kind: prelec",
        "alpha: 0.5",
        "",
        "[policies]",
        "occur: E = occur",
        "refrain: E = idle",
    ]
    write("norcross-c.model", out)


if __name__ == "__main__":
    norcross_b()
    norcross_c()
