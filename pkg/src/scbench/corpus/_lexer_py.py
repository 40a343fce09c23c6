"""Pure-Python source-scanning kernel.

Single pass over Solidity-ish source, tracking string literals so that
comment delimiters inside strings survive. Two modes share the pass:

* ``drop_ws=False`` — remove comments only; newlines spanned by a block
  comment are re-emitted so line numbering stays intact.
* ``drop_ws=True`` — remove comments and every whitespace character,
  including whitespace inside string literals (the checksum form).

Errors do not abort the scan: an unterminated block comment swallows the
rest of the file, an unterminated string keeps it as content, and the
error kind plus offset are returned for strict callers to raise on.

The compiled extension (``_lexer.pyx``) mirrors this byte for byte; keep
the two implementations in sync.
"""

OK = 0
ERR_BLOCK_COMMENT = 1
ERR_STRING = 2


def scan(src: str, drop_ws: bool) -> tuple[str, int, int]:
    out: list[str] = []
    n = len(src)
    i = 0
    run = 0  # start of the pending verbatim copy
    err = OK
    err_pos = -1

    while i < n:
        ch = src[i]

        if ch == '"' or ch == "'":
            quote = ch
            j = i + 1
            closed = False
            while j < n:
                cj = src[j]
                if cj == "\\":
                    j += 2
                elif cj == quote:
                    closed = True
                    break
                else:
                    j += 1
            if closed:
                end = j + 1
            else:
                err, err_pos = ERR_STRING, i
                end = n
            if drop_ws:
                out.append(src[run:i])
                seg = src[i:end]
                out.append("".join(c for c in seg if not c.isspace()))
                run = end
            i = end
            continue

        if ch == "/" and i + 1 < n:
            nxt = src[i + 1]
            if nxt == "/":
                out.append(src[run:i])
                j = i + 2
                while j < n and src[j] != "\n":
                    j += 1
                run = j  # the newline (if any) is not part of the comment
                i = j
                continue
            if nxt == "*":
                out.append(src[run:i])
                close = src.find("*/", i + 2)
                if close < 0:
                    if err == OK:
                        err, err_pos = ERR_BLOCK_COMMENT, i
                    if not drop_ws:
                        out.append("\n" * src.count("\n", i + 2, n))
                    run = n
                    i = n
                    continue
                if not drop_ws:
                    out.append("\n" * src.count("\n", i + 2, close))
                run = close + 2
                i = close + 2
                continue

        if drop_ws and ch.isspace():
            out.append(src[run:i])
            run = i + 1

        i += 1

    out.append(src[run:n])
    return "".join(out), err, err_pos
