"""Pure-Python Earley kernel.

Fallback for the compiled ``_chart`` extension.  Both expose ``prepare``,
``parse_plan`` and ``build_tree`` with identical signatures and results.

Items are encoded as ``start * n_dotted + dotted`` where ``dotted`` numbers
every (alternative, dot) pair; advancing an item's dot is ``code + 1``.
``next_sym[dotted]`` is a nonterminal id (>= 0), ``-(tid + 1)`` for a
terminal, or ``COMPLETE``.

``parse_plan`` returns the canonical derivation as the pre-order list of
global alternative ids.  Canonical means: at each node the smallest
alternative index that derives the span, and among that alternative's splits
the lexicographically smallest sequence of child end positions.
"""

from .tree import Leaf, Node

COMPLETE = -(1 << 30)
LAYOUT = frozenset(" \t\r\n")


def layout_ends(text, skip):
    """``ends[k]``: first position at or after k that is not skipped layout."""
    n = len(text)
    ends = list(range(n + 1))
    if skip:
        for k in range(n - 1, -1, -1):
            if text[k] in LAYOUT:
                ends[k] = ends[k + 1]
    return ends


def build_chart(text_codes, ws_end, next_sym, dotted_lhs, predict, nullable,
                terminals, start_nt, n_dotted):
    """Return ``(chart, furthest)``.

    ``chart[k]`` lists item codes ending at input position ``k`` in insertion
    order; ``furthest`` is the largest position with a non-empty item set.
    ``ws_end[k]`` is where a terminal scan starting at ``k`` begins.
    """
    n = len(text_codes)
    chart = [[] for _ in range(n + 1)]
    seen = [None] * (n + 1)
    waiting_at = [None] * (n + 1)
    text = "".join(map(chr, text_codes))
    lits = ["".join(map(chr, t)) for t in terminals]
    nd = n_dotted
    furthest = 0

    def add(k, code):
        s = seen[k]
        if s is None:
            s = seen[k] = set()
        if code not in s:
            s.add(code)
            chart[k].append(code)

    for d0 in predict[start_nt]:
        add(0, d0)

    for k in range(n + 1):
        items = chart[k]
        if not items:
            continue
        furthest = k
        waiting = waiting_at[k] = {}
        predicted = set()
        i = 0
        while i < len(items):
            code = items[i]
            i += 1
            start, d = divmod(code, nd)
            x = next_sym[d]
            if x == COMPLETE:
                parents = waiting_at[start].get(dotted_lhs[d], ())
                # a zero-width completion may see more parents appended later;
                # those are advanced by the nullable rule at prediction time
                for p in parents[:]:
                    add(k, p + 1)
            elif x >= 0:
                waiting.setdefault(x, []).append(code)
                if x not in predicted:
                    predicted.add(x)
                    base = k * nd
                    for d0 in predict[x]:
                        add(k, base + d0)
                if nullable[x]:
                    add(k, code + 1)
            else:
                lit = lits[-x - 1]
                j = ws_end[k]
                if text.startswith(lit, j):
                    add(j + len(lit), code + 1)
    return chart, furthest


def prepare(c):
    """Kernel-specific form of a compiled grammar; the tables are used as is."""
    return c


def parse_plan(c, text):
    """Return ``(end, error_pos, furthest_items, plan, ambiguous)``.

    ``c`` is a compiled grammar (``parser._Compiled``).  ``end`` is the input
    position where the start symbol's derivation ends (trailing layout may
    follow) or -1 if the input is rejected, in which case ``plan`` is None.
    ``error_pos`` is where scanning stopped, past any layout, and
    ``furthest_items`` are the chart items there.
    """
    ws_end = layout_ends(text, c.skip_ws)
    text_codes = [ord(ch) for ch in text]
    chart, furthest = build_chart(text_codes, ws_end, c.next_sym, c.dotted_lhs, c.predict,
                                  c.nullable, c.term_codes, c.start_nt, c.n_dotted)
    ex = Extractor(chart, text_codes, ws_end, c.next_sym, c.dotted_lhs, c.term_codes,
                   c.n_dotted, c.alt_syms, c.dot_base, c.rule_alts, c.cyclic)
    n = len(text_codes)
    items = list(chart[furthest])
    for k in range(n, -1, -1):
        if ws_end[k] != n:
            break
        if any(ex.complete(a, 0, k) for a in c.rule_alts[c.start_nt]):
            return k, ws_end[furthest], items, ex.plan(c.start_nt, 0, k), ex.ambiguous
    return -1, ws_end[furthest], items, None, False


def build_tree(c, plan):
    """Turn a pre-order list of alternative ids into a derivation tree."""
    leaves = [Leaf(t) for t in c.terminals]
    names, alt_nt, alt_index, alt_syms = c.names, c.alt_nt, c.alt_index, c.alt_syms
    it = iter(plan)
    root = next(it)
    frames = [(root, [], iter(alt_syms[root]))]
    while True:
        a, kids, rest = frames[-1]
        for y in rest:
            if y < 0:
                kids.append(leaves[-y - 1])
            else:
                b = next(it)
                frames.append((b, [], iter(alt_syms[b])))
                break
        else:
            frames.pop()
            node = Node(names[alt_nt[a]], alt_index[a], tuple(kids))
            if not frames:
                return node
            frames[-1][1].append(node)


class Extractor:
    """Canonical tree selection over a finished chart."""

    def __init__(self, chart, text_codes, ws_end, next_sym, dotted_lhs, terminals,
                 n_dotted, alt_syms, dot_base, rule_alts, cyclic=False):
        self.chart = chart
        self.text = "".join(map(chr, text_codes))
        self.ws_end = ws_end
        self.next_sym = next_sym
        self.dotted_lhs = dotted_lhs
        self.lits = ["".join(map(chr, t)) for t in terminals]
        self.nd = n_dotted
        self.alt_syms = alt_syms
        self.dot_base = dot_base
        self.rule_alts = rule_alts
        self.cyclic = cyclic
        self._sets = {}
        self._comp = {}
        self._grounded = {}
        self.ambiguous = False

    def items(self, k):
        s = self._sets.get(k)
        if s is None:
            s = self._sets[k] = frozenset(self.chart[k])
        return s

    def completions(self, q):
        """Nonterminal id -> start positions of completed items ending at q."""
        comp = self._comp.get(q)
        if comp is None:
            nd, nxt, lhs = self.nd, self.next_sym, self.dotted_lhs
            comp = {}
            for code in self.chart[q]:
                start, d = divmod(code, nd)
                if nxt[d] == COMPLETE:
                    comp.setdefault(lhs[d], set()).add(start)
            self._comp[q] = comp
        return comp

    def complete(self, a, i, j):
        return i * self.nd + self.dot_base[a] + len(self.alt_syms[a]) in self.items(j)

    def _starts(self, x, q, lo):
        """Positions p >= lo such that symbol x can span [p, q]."""
        if x >= 0:
            return [p for p in self.completions(q).get(x, ()) if p >= lo]
        lit = self.lits[-x - 1]
        s = q - len(lit)
        if s < lo or not self.text.startswith(lit, s):
            return []
        out = [s]
        p = s
        ws = self.ws_end
        while p > lo and ws[p - 1] == s:
            p -= 1
            out.append(p)
        return out

    def _spans(self, x, p, q):
        if x >= 0:
            return p in self.completions(q).get(x, ())
        lit = self.lits[-x - 1]
        s = self.ws_end[p]
        return s + len(lit) == q and self.text.startswith(lit, s)

    def split(self, a, i, j, allowed=None):
        """Child boundaries [i, ..., j] for alternative a over [i, j], or None.

        ``allowed`` restricts which nonterminals may cover the whole span
        [i, j]; it is only used for grammars with same-span cycles.
        """
        syms = self.alt_syms[a]
        k = len(syms)
        if k == 0:
            return [i] if i == j else None
        prefix = i * self.nd + self.dot_base[a]
        # viable[m]: where the first m children can end with the rest still
        # able to reach j
        viable = [None] * (k + 1)
        viable[k] = {j}
        for m in range(k, 0, -1):
            x = syms[m - 1]
            code = prefix + m - 1
            cand = set()
            for q in viable[m]:
                for p in self._starts(x, q, i):
                    if allowed is not None and x >= 0 and p == i and q == j and x not in allowed:
                        continue
                    if code in self.items(p):
                        cand.add(p)
            if not cand:
                return None
            viable[m - 1] = cand
        if i not in viable[0]:
            return None
        bounds = [i]
        pos = i
        for m in range(1, k + 1):
            x = syms[m - 1]
            best = None
            n_opt = 0
            for q in viable[m]:
                if q < pos or not self._spans(x, pos, q):
                    continue
                if allowed is not None and x >= 0 and pos == i and q == j and x not in allowed:
                    continue
                n_opt += 1
                if best is None or q < best:
                    best = q
            if n_opt > 1:
                self.ambiguous = True
            pos = best
            bounds.append(pos)
        return bounds

    def grounded(self, i, j, banned):
        """Nonterminals with a finite derivation over [i, j] that never
        revisits a banned nonterminal on that same span."""
        key = (i, j, banned)
        hit = self._grounded.get(key)
        if hit is not None:
            return hit
        cands = [x for x, starts in self.completions(j).items() if i in starts and x not in banned]
        done = set()
        changed = True
        while changed:
            changed = False
            for x in cands:
                if x in done:
                    continue
                for a in self.rule_alts[x]:
                    if self.complete(a, i, j) and self.split(a, i, j, done) is not None:
                        done.add(x)
                        changed = True
                        break
        self._grounded[key] = done
        return done

    def resolve(self, x, i, j, banned=None):
        """(alternative, bounds) chosen for nonterminal x over [i, j]."""
        allowed = None
        if banned is not None:
            allowed = self.grounded(i, j, banned | {x})
        found = None
        for a in self.rule_alts[x]:
            if not self.complete(a, i, j):
                continue
            bounds = self.split(a, i, j, allowed)
            if bounds is None:
                continue
            if found is not None:
                self.ambiguous = True
                break
            found = (a, bounds)
        if found is None:
            raise AssertionError(f"no derivation for nonterminal {x} over [{i}, {j}]")
        return found

    def plan(self, x, i, j):
        out = []
        stack = [(x, i, j, frozenset() if self.cyclic else None)]
        while stack:
            x, i, j, banned = stack.pop()
            a, bounds = self.resolve(x, i, j, banned)
            out.append(a)
            syms = self.alt_syms[a]
            for m in range(len(syms) - 1, -1, -1):
                y = syms[m]
                if y < 0:
                    continue
                p, q = bounds[m], bounds[m + 1]
                if banned is None:
                    child_banned = None
                elif p == i and q == j:
                    child_banned = banned | {x}
                else:
                    child_banned = frozenset()
                stack.append((y, p, q, child_banned))
        return out
