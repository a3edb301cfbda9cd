#!/usr/bin/env python3
"""Convert a flat gate-level Verilog netlist (ISCAS-style primitive gates plus
D flip-flop instances) into structural BLIF.

Used once to produce the files under benchmarks/ from the netlists shipped in
the `circuitgraph` Python package (MIT licensed). Not part of the build.
"""
import re
import sys

GATES = {"and", "nand", "or", "nor", "xor", "xnor", "not", "buf"}
FLOPS = {"ff", "fflopd", "dff"}


def cover(kind, n):
    if kind == "not":
        return ["0 1"]
    if kind == "buf":
        return ["1 1"]
    if kind == "and":
        return ["1" * n + " 1"]
    if kind == "nand":
        return ["-" * i + "0" + "-" * (n - i - 1) + " 1" for i in range(n)]
    if kind == "or":
        return ["-" * i + "1" + "-" * (n - i - 1) + " 1" for i in range(n)]
    if kind == "nor":
        return ["0" * n + " 1"]
    rows = []
    for v in range(1 << n):
        bits = [(v >> (n - 1 - i)) & 1 for i in range(n)]
        odd = sum(bits) % 2 == 1
        if odd == (kind == "xor"):
            rows.append("".join(map(str, bits)) + " 1")
    return rows


def convert(text):
    text = re.sub(r"//[^\n]*", "", text)
    text = re.sub(r"/\*.*?\*/", "", text, flags=re.S)
    first = re.search(r"\bmodule\b.*?\bendmodule\b", text, flags=re.S).group(0)
    stmts = [s.strip() for s in first.split(";")]
    name = re.match(r"module\s+(\S+?)\s*\(", stmts[0]).group(1)
    inputs, outputs, body = [], [], []
    clocks = set()
    ident = r"(\\\S+|[A-Za-z_][A-Za-z0-9_$\[\]]*)"

    def clean(s):
        s = s.strip()
        if s.startswith("\\"):
            s = s[1:]
        return s.replace("[", "_").replace("]", "")

    for s in stmts[1:]:
        if not s or s == "endmodule":
            continue
        head = s.split()[0]
        if head in ("input", "output"):
            names = [clean(x) for x in s[len(head):].split(",")]
            (inputs if head == "input" else outputs).extend(names)
        elif head == "wire" or head == "reg":
            continue
        elif head == "assign":
            m = re.match(r"assign\s+" + ident + r"\s*=\s*(.+)$", s, flags=re.S)
            lhs, rhs = clean(m.group(1)), m.group(2).strip()
            if rhs == "1'b1":
                body.append(f".names {lhs}\n1")
            elif rhs == "1'b0":
                body.append(f".names {lhs}")
            else:
                body.append(f".names {clean(rhs)} {lhs}\n1 1")
        elif head in GATES:
            m = re.match(r"\w+\s+\S+\s*\((.*)\)$", s, flags=re.S)
            pins = [clean(x) for x in m.group(1).split(",")]
            out, ins = pins[0], pins[1:]
            rows = "\n".join(cover(head, len(ins)))
            body.append(f".names {' '.join(ins)} {out}\n{rows}")
        elif head in FLOPS:
            conns = dict((k, clean(v)) for k, v in re.findall(r"\.(\w+)\s*\(\s*(\S+?)\s*\)", s))
            clk = conns.get("CK") or conns.get("clk")
            clocks.add(clk)
            body.append(f".latch {conns['D']} {conns['Q']} re {clk} 0")
        else:
            raise SystemExit(f"unsupported statement: {s[:60]}")
    out = [f"# converted from gate-level Verilog ({name})", f".model {name}"]
    out.append(".inputs " + " \\\n  ".join(" ".join(inputs[i:i + 8]) for i in range(0, len(inputs), 8)))
    out.append(".outputs " + " \\\n  ".join(" ".join(outputs[i:i + 8]) for i in range(0, len(outputs), 8)))
    out.extend(body)
    out.append(".end")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    sys.stdout.write(convert(open(sys.argv[1]).read()))
