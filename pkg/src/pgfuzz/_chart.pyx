# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled Earley kernel; mirrors ``_chart_py`` (see there for the encoding).

Storage is flat to keep allocation out of the inner loops: item membership
is one open-addressing hash keyed by (item, position), items waiting on a
nonterminal form linked lists headed per (position, nonterminal), and the
completed items used during extraction are packed ``(lhs << 32) | start``
words sorted per end position.

Cyclic grammars (a nonterminal able to derive itself over the same span) are
not handled by the compiled extractor; ``parse_plan`` raises
NotImplementedError for them and the caller uses the Python one.
"""

from libcpp.vector cimport vector
from libcpp.algorithm cimport sort, unique, binary_search, lower_bound

from .tree import Leaf, Node

# frozen nodes: fill the slots directly instead of running __init__
_new_node = Node.__new__
_set_symbol = Node.symbol.__set__
_set_alt = Node.alt.__set__
_set_children = Node.children.__set__

ctypedef long long item_t

cdef int COMPLETE = -(1 << 30)
cdef item_t EMPTY = -1


cdef inline unsigned long long _mix(unsigned long long x) nogil:
    x ^= x >> 33
    x *= 0xff51afd7ed558ccdULL
    x ^= x >> 33
    return x


cdef class _Tables:
    """Grammar tables converted once per parser."""
    cdef vector[int] nxt
    cdef vector[int] lhs
    cdef vector[vector[int]] pred
    cdef vector[vector[int]] lits
    cdef vector[char] nullable
    cdef item_t nd
    cdef int n_nt
    cdef int start_nt
    cdef bint skip_ws
    cdef bint cyclic
    cdef vector[vector[int]] alt_syms
    cdef vector[int] dot_base
    cdef vector[vector[int]] rule_alts
    cdef vector[int] alt_nt
    cdef vector[int] alt_index
    cdef list names
    cdef list leaves


def prepare(c):
    """Convert a compiled grammar (``parser._Compiled``) for this kernel."""
    cdef _Tables t = _Tables()
    t.nxt = c.next_sym
    t.lhs = c.dotted_lhs
    t.pred = c.predict
    t.lits = c.term_codes
    t.nullable = [1 if x else 0 for x in c.nullable]
    t.nd = c.n_dotted
    t.n_nt = len(c.predict)
    t.start_nt = c.start_nt
    t.skip_ws = c.skip_ws
    t.cyclic = c.cyclic
    t.alt_syms = c.alt_syms
    t.dot_base = c.dot_base
    t.rule_alts = c.rule_alts
    t.alt_nt = c.alt_nt
    t.alt_index = c.alt_index
    t.names = list(c.names)
    t.leaves = [Leaf(x) for x in c.terminals]
    return t


cdef class _Kernel:
    cdef _Tables g
    cdef vector[int] text
    cdef vector[int] wsend
    cdef int n
    cdef vector[vector[item_t]] chart
    cdef int furthest
    # membership hash over key = code * (n + 1) + position
    cdef vector[item_t] slots
    cdef size_t filled
    cdef size_t mask
    # extraction
    cdef vector[vector[item_t]] comp
    cdef vector[char] comp_built
    cdef vector[vector[int]] viable
    cdef vector[int] cand, st
    cdef bint ambiguous

    # -- membership ---------------------------------------------------------

    cdef void _grow(self):
        cdef vector[item_t] old = self.slots
        cdef size_t i, h
        self.slots = vector[item_t](old.size() * 2, EMPTY)
        self.mask = self.slots.size() - 1
        for i in range(old.size()):
            if old[i] != EMPTY:
                h = _mix(<unsigned long long>old[i]) & self.mask
                while self.slots[h] != EMPTY:
                    h = (h + 1) & self.mask
                self.slots[h] = old[i]

    cdef bint insert(self, int k, item_t code):
        cdef item_t key = code * (self.n + 1) + k
        cdef size_t h = _mix(<unsigned long long>key) & self.mask
        while self.slots[h] != EMPTY:
            if self.slots[h] == key:
                return False
            h = (h + 1) & self.mask
        self.slots[h] = key
        self.filled += 1
        if self.filled * 2 > self.slots.size():
            self._grow()
        return True

    cdef bint has(self, int k, item_t code):
        cdef item_t key = code * (self.n + 1) + k
        cdef size_t h = _mix(<unsigned long long>key) & self.mask
        while self.slots[h] != EMPTY:
            if self.slots[h] == key:
                return True
            h = (h + 1) & self.mask
        return False

    cdef inline void add(self, int k, item_t code):
        if self.insert(k, code):
            self.chart[k].push_back(code)

    cdef bint match(self, int j, int t):
        cdef size_t q
        cdef size_t m = self.g.lits[t].size()
        if j + <int>m > self.n:
            return False
        for q in range(m):
            if self.text[j + q] != self.g.lits[t][q]:
                return False
        return True

    # -- recognition --------------------------------------------------------

    cdef void build(self, int start_nt):
        cdef int n = self.n
        cdef item_t nd = self.g.nd
        cdef int n_nt = self.g.n_nt
        # waiting lists: head per (position, nonterminal), prepend-linked
        cdef vector[int] head = vector[int](<size_t>(n + 1) * n_nt, -1)
        cdef vector[int] link
        cdef vector[item_t] witem
        cdef vector[int] predicted_at = vector[int](n_nt, -1)
        cdef int k, x, a, j, t, w
        cdef size_t i
        cdef item_t code, start, d, base

        self.chart = vector[vector[item_t]](n + 1)
        self.slots = vector[item_t](1024, EMPTY)
        self.mask = 1023
        self.filled = 0
        self.furthest = 0
        for t in range(<int>self.g.pred[start_nt].size()):
            self.add(0, self.g.pred[start_nt][t])

        for k in range(n + 1):
            if self.chart[k].empty():
                continue
            self.furthest = k
            i = 0
            while i < self.chart[k].size():
                code = self.chart[k][i]
                i += 1
                start = code // nd
                d = code % nd
                x = self.g.nxt[d]
                if x == COMPLETE:
                    # walking from the current head sees exactly the parents
                    # present now; later zero-width parents are advanced by
                    # the nullable rule at prediction time
                    w = head[start * n_nt + self.g.lhs[d]]
                    while w >= 0:
                        self.add(k, witem[w] + 1)
                        w = link[w]
                elif x >= 0:
                    link.push_back(head[<size_t>k * n_nt + x])
                    witem.push_back(code)
                    head[<size_t>k * n_nt + x] = <int>witem.size() - 1
                    if predicted_at[x] != k:
                        predicted_at[x] = k
                        base = <item_t>k * nd
                        for t in range(<int>self.g.pred[x].size()):
                            self.add(k, base + self.g.pred[x][t])
                    if self.g.nullable[x]:
                        self.add(k, code + 1)
                else:
                    t = -x - 1
                    j = self.wsend[k]
                    if self.match(j, t):
                        self.add(j + <int>self.g.lits[t].size(), code + 1)

    # -- extraction ---------------------------------------------------------

    cdef vector[item_t]* completions(self, int q):
        cdef size_t i
        cdef item_t code, d
        cdef vector[item_t]* c = &self.comp[q]
        if not self.comp_built[q]:
            self.comp_built[q] = 1
            for i in range(self.chart[q].size()):
                code = self.chart[q][i]
                d = code % self.g.nd
                if self.g.nxt[d] == COMPLETE:
                    c.push_back((<item_t>self.g.lhs[d] << 32) | (code // self.g.nd))
            sort(c.begin(), c.end())
        return c

    cdef inline bint complete(self, int a, int i, int j):
        return self.has(j, <item_t>i * self.g.nd + self.g.dot_base[a] + <int>self.g.alt_syms[a].size())

    cdef void starts(self, int x, int q, int lo, vector[int]& out):
        cdef vector[item_t]* c
        cdef item_t key, hi
        cdef size_t pos
        cdef int t, s, p, m
        out.clear()
        if x >= 0:
            c = self.completions(q)
            key = (<item_t>x << 32) | lo
            hi = (<item_t>(x + 1)) << 32
            pos = lower_bound(c.begin(), c.end(), key) - c.begin()
            while pos < c.size() and c[0][pos] < hi:
                out.push_back(<int>(c[0][pos] & 0xffffffff))
                pos += 1
            return
        t = -x - 1
        m = <int>self.g.lits[t].size()
        s = q - m
        if s < lo or not self.match(s, t):
            return
        out.push_back(s)
        p = s
        while p > lo and self.wsend[p - 1] == s:
            p -= 1
            out.push_back(p)

    cdef bint spans(self, int x, int p, int q):
        cdef vector[item_t]* c
        cdef int t, s
        if x >= 0:
            c = self.completions(q)
            return binary_search(c.begin(), c.end(), (<item_t>x << 32) | p)
        t = -x - 1
        s = self.wsend[p]
        return s + <int>self.g.lits[t].size() == q and self.match(s, t)

    cdef bint split(self, int a, int i, int j, vector[int]& bounds):
        cdef int k = <int>self.g.alt_syms[a].size()
        cdef int m, x, pos, best, n_opt, q
        cdef size_t u, v
        cdef item_t code
        cdef item_t prefix = <item_t>i * self.g.nd + self.g.dot_base[a]
        bounds.clear()
        if k == 0:
            if i != j:
                return False
            bounds.push_back(i)
            return True
        if <int>self.viable.size() < k + 1:
            self.viable.resize(k + 1)
        self.viable[k].clear()
        self.viable[k].push_back(j)
        for m in range(k, 0, -1):
            x = self.g.alt_syms[a][m - 1]
            code = prefix + m - 1
            self.cand.clear()
            for u in range(self.viable[m].size()):
                self.starts(x, self.viable[m][u], i, self.st)
                for v in range(self.st.size()):
                    if self.has(self.st[v], code):
                        self.cand.push_back(self.st[v])
            if self.cand.empty():
                return False
            sort(self.cand.begin(), self.cand.end())
            self.cand.erase(unique(self.cand.begin(), self.cand.end()), self.cand.end())
            self.viable[m - 1] = self.cand
        if not binary_search(self.viable[0].begin(), self.viable[0].end(), i):
            return False
        bounds.push_back(i)
        pos = i
        for m in range(1, k + 1):
            x = self.g.alt_syms[a][m - 1]
            best = -1
            n_opt = 0
            for u in range(self.viable[m].size()):
                q = self.viable[m][u]
                if q >= pos and self.spans(x, pos, q):
                    n_opt += 1
                    if best < 0 or q < best:
                        best = q
            if n_opt > 1:
                self.ambiguous = True
            pos = best
            bounds.push_back(pos)
        return True

    cdef list plan(self, int x0, int i0, int j0):
        cdef list out = []
        cdef vector[int] sx, si, sj, bounds, first
        cdef int x, i, j, a, found, m, y
        cdef size_t r
        sx.push_back(x0); si.push_back(i0); sj.push_back(j0)
        while not sx.empty():
            x = sx.back(); i = si.back(); j = sj.back()
            sx.pop_back(); si.pop_back(); sj.pop_back()
            found = -1
            for r in range(self.g.rule_alts[x].size()):
                a = self.g.rule_alts[x][r]
                if not self.complete(a, i, j):
                    continue
                if found >= 0:
                    if self.split(a, i, j, bounds):
                        self.ambiguous = True
                        break
                    continue
                if self.split(a, i, j, first):
                    found = a
            if found < 0:
                raise AssertionError(f"no derivation for nonterminal {x} over [{i}, {j}]")
            out.append(found)
            for m in range(<int>self.g.alt_syms[found].size() - 1, -1, -1):
                y = self.g.alt_syms[found][m]
                if y >= 0:
                    sx.push_back(y); si.push_back(first[m]); sj.push_back(first[m + 1])
        return out


def build_chart(_Tables tables, str text):
    """Return ``(chart, furthest)``; see the Python kernel."""
    cdef _Kernel k = _setup(tables, text)
    k.build(tables.start_nt)
    return k.chart, k.furthest


def parse_plan(_Tables tables, str text):
    """Return ``(end, error_pos, furthest_items, plan, ambiguous)``."""
    if tables.cyclic:
        raise NotImplementedError("cyclic grammars need the Python extractor")
    cdef _Kernel k = _setup(tables, text)
    cdef int end = -1, e, r
    cdef int start_nt = tables.start_nt
    k.build(start_nt)
    k.comp = vector[vector[item_t]](k.n + 1)
    k.comp_built = vector[char](k.n + 1, 0)
    k.ambiguous = False
    furthest_items = k.chart[k.furthest]
    error_pos = k.wsend[k.furthest]
    for e in range(k.n, -1, -1):
        if k.wsend[e] != k.n:
            break
        for r in range(<int>tables.rule_alts[start_nt].size()):
            if k.complete(tables.rule_alts[start_nt][r], 0, e):
                end = e
                break
        if end >= 0:
            break
    if end < 0:
        return -1, error_pos, furthest_items, None, False
    plan = k.plan(start_nt, 0, end)
    return end, error_pos, furthest_items, plan, k.ambiguous


def build_tree(_Tables tables, list plan):
    """Turn a pre-order list of alternative ids into a derivation tree."""
    cdef vector[vector[int]]* syms = &tables.alt_syms
    cdef list names = tables.names
    cdef list leaves = tables.leaves
    cdef vector[int] st_alt, st_pos
    cdef list st_kids = []
    cdef list kids
    cdef Py_ssize_t next_id = 1, top
    cdef int a, b, y, pos
    cdef bint descended
    st_alt.push_back(plan[0])
    st_pos.push_back(0)
    st_kids.append([])
    while True:
        top = st_alt.size() - 1
        a = st_alt[top]
        pos = st_pos[top]
        kids = <list>st_kids[top]
        descended = False
        while pos < <int>syms[0][a].size():
            y = syms[0][a][pos]
            pos += 1
            if y < 0:
                kids.append(leaves[-y - 1])
            else:
                st_pos[top] = pos
                b = plan[next_id]
                next_id += 1
                st_alt.push_back(b)
                st_pos.push_back(0)
                st_kids.append([])
                descended = True
                break
        if descended:
            continue
        node = _new_node(Node)
        _set_symbol(node, names[tables.alt_nt[a]])
        _set_alt(node, tables.alt_index[a])
        _set_children(node, tuple(kids))
        st_alt.pop_back()
        st_pos.pop_back()
        st_kids.pop()
        if st_alt.empty():
            return node
        (<list>st_kids[top - 1]).append(node)


cdef _Kernel _setup(_Tables tables, str text):
    cdef _Kernel k = _Kernel()
    cdef Py_UCS4 ch
    cdef int i, n = len(text)
    cdef bint skip = tables.skip_ws
    k.g = tables
    k.n = n
    k.text.reserve(n)
    for ch in text:
        k.text.push_back(<int>ch)
    k.wsend.resize(n + 1)
    k.wsend[n] = n
    for i in range(n - 1, -1, -1):
        ch = k.text[i]
        if skip and (ch == u' ' or ch == u'\t' or ch == u'\r' or ch == u'\n'):
            k.wsend[i] = k.wsend[i + 1]
        else:
            k.wsend[i] = i
    return k
