# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled source-scanning kernel.

Mirrors ``_lexer_py.scan`` exactly; see that module for the grammar and
recovery rules. Keep the two implementations in sync.
"""

from cpython.unicode cimport Py_UNICODE_ISSPACE

OK = 0
ERR_BLOCK_COMMENT = 1
ERR_STRING = 2

cdef int _OK = 0
cdef int _ERR_BLOCK = 1
cdef int _ERR_STRING = 2


cdef str _strip_ws(str seg):
    cdef list kept = []
    cdef Py_ssize_t i, n = len(seg)
    cdef Py_ssize_t run = 0
    cdef Py_UCS4 c
    for i in range(n):
        c = seg[i]
        if Py_UNICODE_ISSPACE(c):
            if run < i:
                kept.append(seg[run:i])
            run = i + 1
    if run < n:
        kept.append(seg[run:n])
    return "".join(kept)


def scan(str src, bint drop_ws):
    cdef list out = []
    cdef Py_ssize_t n = len(src)
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t run = 0
    cdef Py_ssize_t j, close, end
    cdef int err = _OK
    cdef Py_ssize_t err_pos = -1
    cdef Py_UCS4 ch, nxt, cj, quote
    cdef bint closed

    while i < n:
        ch = src[i]

        if ch == u'"' or ch == u"'":
            quote = ch
            j = i + 1
            closed = False
            while j < n:
                cj = src[j]
                if cj == u'\\':
                    j += 2
                elif cj == quote:
                    closed = True
                    break
                else:
                    j += 1
            if closed:
                end = j + 1
            else:
                err = _ERR_STRING
                err_pos = i
                end = n
            if drop_ws:
                out.append(src[run:i])
                out.append(_strip_ws(src[i:end]))
                run = end
            i = end
            continue

        if ch == u'/' and i + 1 < n:
            nxt = src[i + 1]
            if nxt == u'/':
                out.append(src[run:i])
                j = i + 2
                while j < n and src[j] != u'\n':
                    j += 1
                run = j
                i = j
                continue
            if nxt == u'*':
                out.append(src[run:i])
                close = src.find(u'*/', i + 2)
                if close < 0:
                    if err == _OK:
                        err = _ERR_BLOCK
                        err_pos = i
                    if not drop_ws:
                        out.append(u'\n' * src.count(u'\n', i + 2, n))
                    run = n
                    i = n
                    continue
                if not drop_ws:
                    out.append(u'\n' * src.count(u'\n', i + 2, close))
                run = close + 2
                i = close + 2
                continue

        if drop_ws and Py_UNICODE_ISSPACE(ch):
            out.append(src[run:i])
            run = i + 1

        i += 1

    out.append(src[run:n])
    return "".join(out), err, err_pos
