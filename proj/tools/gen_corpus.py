#!/usr/bin/env python3
# Copyright 2026 The rnndag Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the bundled synthetic corpus of annotated sentences and DRSs.

Writes two aligned files: a clause file (one DRS per blank-line separated
block) and a token file (one sentence per block, one token per line as
`word lemma pos semtag dep`). The first document is "Every ship in the dock
needs a big anchor".
"""

import argparse
import random

NOUNS = [
    "ship", "dock", "anchor", "cat", "dog", "child", "teacher", "house",
    "garden", "river", "car", "road", "book", "letter", "friend", "city",
    "bird", "tree", "boat", "window", "table", "door", "farmer", "horse",
    "student", "doctor", "train", "station", "lamp", "song",
]
TRANSITIVE = [
    ("need", "needs", "needed"), ("see", "sees", "saw"),
    ("like", "likes", "liked"), ("find", "finds", "found"),
    ("build", "builds", "built"), ("paint", "paints", "painted"),
    ("carry", "carries", "carried"), ("visit", "visits", "visited"),
    ("read", "reads", "read"), ("open", "opens", "opened"),
    ("follow", "follows", "followed"), ("watch", "watches", "watched"),
]
INTRANSITIVE = [
    ("sleep", "sleeps", "slept"), ("run", "runs", "ran"),
    ("sing", "sings", "sang"), ("arrive", "arrives", "arrived"),
    ("laugh", "laughs", "laughed"), ("wait", "waits", "waited"),
    ("swim", "swims", "swam"), ("leave", "leaves", "left"),
]
ADJECTIVES = [
    "big", "small", "red", "old", "young", "happy", "green", "quiet",
    "dark", "tall", "new", "cold",
]
ADVERBS = ["quickly", "slowly", "loudly", "quietly"]
RELATIONS = ["CONTINUATION", "RESULT", "CONTRAST"]
CONNECTIVES = {"CONTINUATION": "then", "RESULT": "so", "CONTRAST": "but"}


class Doc:
    """Accumulates tokens and clauses with per-sort variable counters."""

    def __init__(self):
        self.tokens = []
        self.clauses = []
        self.counters = {}

    def var(self, sort):
        self.counters[sort] = self.counters.get(sort, 0) + 1
        return f"{sort}{self.counters[sort]}"

    def tok(self, word, lemma, pos, semtag, dep):
        self.tokens.append(f"{word} {lemma} {pos} {semtag} {dep}")

    def add(self, *fields):
        self.clauses.append(" ".join(fields))


def noun_sense(rng):
    return "n.0" + str(rng.choice([1, 1, 1, 2]))


def every_template(doc, rng, first=False):
    """Every N1 in the N2 Vs a ADJ N3."""
    if first:
        n1, n2, n3, verb, adj = "ship", "dock", "anchor", TRANSITIVE[0], "big"
        senses = False
    else:
        n1, n2, n3 = rng.sample(NOUNS, 3)
        verb, adj = rng.choice(TRANSITIVE), rng.choice(ADJECTIVES)
        senses = True
    b1, b2, b3 = doc.var("b"), doc.var("b"), doc.var("b")
    b4 = doc.var("b")
    x1, x2 = doc.var("x"), doc.var("x")
    e1, s1, x3 = doc.var("e"), doc.var("s"), doc.var("x")

    def lemma(word, sense):
        return f"{word}~{sense}" if senses else word

    doc.tok("Every", "every", "DT", "AND", "det")
    doc.tok(n1, n1, "NN", "CON", "nsubj")
    doc.tok("in", "in", "IN", "REL", "case")
    doc.tok("the", "the", "DT", "DEF", "det")
    doc.tok(n2, n2, "NN", "CON", "nmod")
    doc.tok(verb[1], verb[0], "VBZ", "ENS", "root")
    doc.tok("a", "a", "DT", "DIS", "det")
    doc.tok(adj, adj, "JJ", "IST", "amod")
    doc.tok(n3, n3, "NN", "CON", "obj")
    doc.tok(".", ".", ".", "NIL", "punct")
    doc.add(b2, "REF", x1)
    doc.add(b2, "COND", lemma(n1, noun_sense(rng)), x1)
    doc.add(b2, "COND", "PartOf", x1, x2)
    doc.add(b3, "REF", e1, s1, x3)
    doc.add(b3, "COND", lemma(verb[0], "v.01"), e1)
    doc.add(b3, "COND", "Pivot", e1, x1)
    doc.add(b3, "COND", "Theme", e1, x3)
    doc.add(b3, "COND", lemma(n3, noun_sense(rng)), x3)
    doc.add(b3, "COND", lemma(adj, "a.01"), s1)
    doc.add(b3, "COND", "Topic", s1, x3)
    doc.add(b4, "REF", x2)
    doc.add(b4, "COND", lemma(n2, noun_sense(rng)), x2)
    doc.add(b1, "OP", "IMP", b2, b3)
    doc.add(b4, "PRESUP", b2)


def noun_phrase(doc, rng, dep, definite, box, presup_box, adjective):
    """Emits tokens for a noun phrase; returns (var, clauses, presup)."""
    noun = rng.choice(NOUNS)
    x = doc.var("x")
    det = "the" if definite else "a"
    doc.tok(det.capitalize() if dep == "nsubj" else det, det, "DT",
            "DEF" if definite else "DIS", "det")
    clauses = []
    state = None
    if adjective:
        adj = rng.choice(ADJECTIVES)
        state = doc.var("s")
        doc.tok(adj, adj, "JJ", "IST", "amod")
        sense = rng.choice(["a.01", "a.01", "s.01"])
        clauses.append((box, "COND", f"{adj}~{sense}", state))
        clauses.append((box, "COND", "Topic", state, x))
    doc.tok(noun, noun, "NN", "CON", dep)
    target = presup_box if definite else box
    clauses.insert(0, (target, "COND", f"{noun}~{noun_sense(rng)}", x))
    return x, state, target, clauses


def simple_template(doc, rng):
    """The N1 Ved a (ADJ) N2 (ADV)."""
    b1, b2 = doc.var("b"), doc.var("b")
    e1 = doc.var("e")
    verb = rng.choice(TRANSITIVE)
    subj, subj_state, subj_box, subj_clauses = noun_phrase(
        doc, rng, "nsubj", True, b1, b2, rng.random() < 0.3)
    doc.tok(verb[2], verb[0], "VBD", "PST", "root")
    obj, obj_state, obj_box, obj_clauses = noun_phrase(
        doc, rng, "obj", rng.random() < 0.4, b1, b2, rng.random() < 0.5)
    adverb = rng.choice(ADVERBS) if rng.random() < 0.3 else None
    if adverb:
        doc.tok(adverb, adverb, "RB", "IST", "advmod")
    doc.tok(".", ".", ".", "NIL", "punct")
    manner = doc.var("s") if adverb else None
    main_refs = [e1] + [v for v in (subj_state, obj_state, manner) if v]
    presup_refs = [subj]
    (presup_refs if obj_box == b2 else main_refs).append(obj)
    doc.add(b1, "REF", *main_refs)
    doc.add(b1, "COND", f"{verb[0]}~v.01", e1)
    doc.add(b1, "COND", "Agent", e1, subj)
    doc.add(b1, "COND", "Theme", e1, obj)
    if adverb:
        doc.add(b1, "COND", f"{adverb}~r.01", manner)
        doc.add(b1, "COND", "Manner", e1, manner)
    for c in subj_clauses + obj_clauses:
        doc.add(*c)
    doc.add(b2, "REF", *presup_refs)
    doc.add(b2, "PRESUP", b1)


def negation_template(doc, rng, outer_anchor):
    """The N1 did not V the N2."""
    b1, b2, b3 = doc.var("b"), doc.var("b"), doc.var("b")
    e1 = doc.var("e")
    verb = rng.choice(TRANSITIVE)
    subj, _, _, subj_clauses = noun_phrase(doc, rng, "nsubj", True, b2, b3,
                                           False)
    doc.tok("did", "do", "VBD", "PST", "aux")
    doc.tok("not", "not", "RB", "NOT", "advmod")
    doc.tok(verb[0], verb[0], "VB", "EXS", "root")
    obj, obj_state, _, obj_clauses = noun_phrase(doc, rng, "obj", True, b2,
                                                 b3, rng.random() < 0.3)
    doc.tok(".", ".", ".", "NIL", "punct")
    doc.add(b2, "REF", e1, *([obj_state] if obj_state else []))
    doc.add(b2, "COND", f"{verb[0]}~v.01", e1)
    doc.add(b2, "COND", "Agent", e1, subj)
    doc.add(b2, "COND", "Theme", e1, obj)
    for c in subj_clauses + obj_clauses:
        doc.add(*c)
    doc.add(b3, "REF", subj, obj)
    doc.add(b1, "OP", "NOT", b2)
    # Anchoring the presupposition in the outer box is common in annotated
    # data but is not recoverable from the graph, which only marks ^p.
    doc.add(b3, "PRESUP", b1 if outer_anchor else b2)


def modal_template(doc, rng):
    """A N1 might V."""
    b1, b2 = doc.var("b"), doc.var("b")
    x1, e1 = doc.var("x"), doc.var("e")
    noun, verb = rng.choice(NOUNS), rng.choice(INTRANSITIVE)
    doc.tok("A", "a", "DT", "DIS", "det")
    doc.tok(noun, noun, "NN", "CON", "nsubj")
    doc.tok("might", "might", "MD", "POS", "aux")
    doc.tok(verb[0], verb[0], "VB", "EXS", "root")
    doc.tok(".", ".", ".", "NIL", "punct")
    doc.add(b2, "REF", e1, x1)
    doc.add(b2, "COND", f"{verb[0]}~v.01", e1)
    doc.add(b2, "COND", "Agent", e1, x1)
    doc.add(b2, "COND", f"{noun}~{noun_sense(rng)}", x1)
    doc.add(b1, "OP", "POS", b2)


def discourse_template(doc, rng):
    """A N1 Ved. CONNECTIVE a N2 Ved."""
    relation = rng.choice(RELATIONS)
    b0, b1, b2 = doc.var("b"), doc.var("b"), doc.var("b")
    for box, first in ((b1, True), (b2, False)):
        x, e = doc.var("x"), doc.var("e")
        noun, verb = rng.choice(NOUNS), rng.choice(INTRANSITIVE)
        if not first:
            word = CONNECTIVES[relation]
            doc.tok(word.capitalize(), word, "RB", "DIS", "advmod")
        doc.tok("A" if first else "a", "a", "DT", "DIS", "det")
        doc.tok(noun, noun, "NN", "CON", "nsubj")
        doc.tok(verb[2], verb[0], "VBD", "PST", "root")
        doc.tok(".", ".", ".", "NIL", "punct")
        doc.add(box, "REF", e, x)
        doc.add(box, "COND", f"{verb[0]}~v.01", e)
        doc.add(box, "COND", "Agent", e, x)
        doc.add(box, "COND", f"{noun}~{noun_sense(rng)}", x)
    doc.add(b0, "OP", relation, b1, b2)


def intransitive_template(doc, rng):
    """The (ADJ) N1 Ved in the N2."""
    b1, b2 = doc.var("b"), doc.var("b")
    e1 = doc.var("e")
    verb = rng.choice(INTRANSITIVE)
    subj, subj_state, _, subj_clauses = noun_phrase(
        doc, rng, "nsubj", True, b1, b2, rng.random() < 0.4)
    doc.tok(verb[2], verb[0], "VBD", "PST", "root")
    doc.tok("in", "in", "IN", "REL", "case")
    place, _, _, place_clauses = noun_phrase(doc, rng, "obl", True, b1, b2,
                                             False)
    doc.tok(".", ".", ".", "NIL", "punct")
    doc.add(b1, "REF", e1, *([subj_state] if subj_state else []))
    doc.add(b1, "COND", f"{verb[0]}~v.01", e1)
    doc.add(b1, "COND", "Agent", e1, subj)
    doc.add(b1, "COND", "Location", e1, place)
    for c in subj_clauses + place_clauses:
        doc.add(*c)
    doc.add(b2, "REF", subj, place)
    doc.add(b2, "PRESUP", b1)


def generate(count, seed):
    rng = random.Random(seed)
    docs = []
    first = Doc()
    every_template(first, rng, first=True)
    docs.append(first)
    while len(docs) < count:
        doc = Doc()
        roll = rng.random()
        if roll < 0.15:
            every_template(doc, rng)
        elif roll < 0.45:
            simple_template(doc, rng)
        elif roll < 0.60:
            negation_template(doc, rng, outer_anchor=rng.random() < 0.15)
        elif roll < 0.70:
            modal_template(doc, rng)
        elif roll < 0.85:
            discourse_template(doc, rng)
        else:
            intransitive_template(doc, rng)
        docs.append(doc)
    return docs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=240)
    parser.add_argument("--seed", type=int, default=20260101)
    parser.add_argument("--clauses", required=True)
    parser.add_argument("--tokens", required=True)
    args = parser.parse_args()
    docs = generate(args.count, args.seed)
    with open(args.clauses, "w", encoding="utf-8") as out:
        out.write("\n\n".join("\n".join(d.clauses) for d in docs) + "\n")
    with open(args.tokens, "w", encoding="utf-8") as out:
        out.write("\n\n".join("\n".join(d.tokens) for d in docs) + "\n")


if __name__ == "__main__":
    main()
