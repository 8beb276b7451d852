#!/usr/bin/env python3
"""Tiny DPLL solver speaking the DIMACS competition output format."""
import sys


def parse(path):
    clauses, current = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line[0] in "cp%":
                continue
            for tok in line.split():
                lit = int(tok)
                if lit == 0:
                    clauses.append(current)
                    current = []
                else:
                    current.append(lit)
    return clauses


def propagate(clauses, assign):
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            free, satisfied = [], False
            for lit in clause:
                value = assign.get(abs(lit))
                if value is None:
                    free.append(lit)
                elif value == (lit > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            if not free:
                return False
            if len(free) == 1:
                assign[abs(free[0])] = free[0] > 0
                changed = True
    return True


def dpll(clauses, assign):
    if not propagate(clauses, assign):
        return None
    for clause in clauses:
        for lit in clause:
            if abs(lit) not in assign:
                for value in (lit > 0, lit < 0):
                    trial = dict(assign)
                    trial[abs(lit)] = value
                    result = dpll(clauses, trial)
                    if result is not None:
                        return result
                return None
    return assign


def main():
    sys.setrecursionlimit(100000)
    clauses = parse(sys.argv[1])
    model = dpll(clauses, {})
    if model is None:
        print("s UNSATISFIABLE")
        sys.exit(20)
    print("s SATISFIABLE")
    top = max((abs(l) for c in clauses for l in c), default=0)
    lits = [v if model.get(v, False) else -v for v in range(1, top + 1)]
    print("v " + " ".join(map(str, lits)) + " 0")
    sys.exit(10)


main()
