"""Error-tolerant Solidity source scanning.

Splits files into contracts and function declarations without a full grammar:
a segment lexer separates code, comments, and string literals, and a
brace/paren matcher recovers declaration spans. A function whose body cannot
be parsed is still recorded as long as its signature parses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .corpus import SourceFile

DEFAULT_MIN_COMMENT_TOKENS = 6

_IDENT = r"[A-Za-z_$][A-Za-z0-9_$]*"
_IDENT_RE = re.compile(_IDENT)
_WS_RUN_RE = re.compile(r"\s+")
_PRAGMA_RE = re.compile(r"pragma\s+solidity\s+([^;]+);")
_VERSION_LITERAL_RE = re.compile(r"(\d+)\.(\d+)(?:\.(\d+))?")
_CONTRACT_RE = re.compile(r"\b(contract|library|interface)\s+(" + _IDENT + r")")
_MEMBER_RE = re.compile(r"\b(function|constructor|modifier|struct|enum|event|error|receive|fallback)\b")
_VISIBILITY_RE = re.compile(r"\b(public|external|internal|private)\b")
_DOC_LINE_PREFIX_RE = re.compile(r"^\s*/{3,}\s?")
_BLOCK_GUTTER_RE = re.compile(r"^\s*\*+\s?")

_TOKEN_RE = re.compile(
    r"""
    0[xX][0-9a-fA-F]+
  | \d+(?:\.\d+)?(?:[eE][+-]?\d+)?
  | [A-Za-z_$][A-Za-z0-9_$]*
  | "(?:[^"\\\n]|\\.)*"
  | '(?:[^'\\\n]|\\.)*'
  | >>=|<<=|\*\*=?|==|!=|<=|>=|&&|\|\||=>|->|\+\+|--|[+\-*/%&|^]=|<<|>>
  | [-+*/%<>=!&|^~?:;,.(){}\[\]]
    """,
    re.VERBOSE,
)

_ELEMENTARY_ALIASES = {
    "uint": "uint256",
    "int": "int256",
    "byte": "bytes1",
    "fixed": "fixed128x18",
    "ufixed": "ufixed128x18",
}
_LOCATION_KEYWORDS = {"memory", "calldata", "storage", "indexed"}
_VAR_MODIFIER_KEYWORDS = {
    "public",
    "private",
    "internal",
    "constant",
    "immutable",
    "override",
    "virtual",
    "transient",
}


class VersionBucket(str, Enum):
    V0_4 = "0.4"
    V0_5 = "0.5"
    V0_6 = "0.6"
    V0_7 = "0.7"
    V0_8 = "0.8"
    NO_VERSION = "no_version"


@dataclass(frozen=True)
class Signature:
    parameter_types: tuple[str, ...]
    return_types: tuple[str, ...]

    @property
    def parameter_count(self) -> int:
        return len(self.parameter_types)


@dataclass
class FunctionRecord:
    function_id: str
    contract_id: str
    contract_name: str
    solidity_version: VersionBucket
    contract_variables: list[dict]
    function_name: str
    function_visibility: str
    token_length: int
    function_code: str
    function_comment: Optional[str]
    char_length: int
    parameter_types: list[str]
    return_types: list[str]
    accepted: bool = False

    def to_json(self) -> dict:
        return {
            "function_id": self.function_id,
            "contract_id": self.contract_id,
            "contract_name": self.contract_name,
            "solidity_version": self.solidity_version.value,
            "contract_variables": self.contract_variables,
            "function_name": self.function_name,
            "function_visibility": self.function_visibility,
            "token_length": self.token_length,
            "function_code": self.function_code,
            "function_comment": self.function_comment,
            "char_length": self.char_length,
            "parameter_types": self.parameter_types,
            "return_types": self.return_types,
            "accepted": self.accepted,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "FunctionRecord":
        return cls(
            function_id=rec["function_id"],
            contract_id=rec["contract_id"],
            contract_name=rec["contract_name"],
            solidity_version=VersionBucket(rec["solidity_version"]),
            contract_variables=rec.get("contract_variables", []),
            function_name=rec["function_name"],
            function_visibility=rec["function_visibility"],
            token_length=rec["token_length"],
            function_code=rec["function_code"],
            function_comment=rec.get("function_comment"),
            char_length=rec["char_length"],
            parameter_types=rec.get("parameter_types", []),
            return_types=rec.get("return_types", []),
            accepted=rec.get("accepted", False),
        )


@dataclass
class ContractInfo:
    contract_id: str
    name: str
    kind: str
    variables: list[dict] = field(default_factory=list)


@dataclass
class FileExtraction:
    file_id: str
    version: VersionBucket
    contracts: list[ContractInfo] = field(default_factory=list)
    functions: list[FunctionRecord] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# segment lexer


@dataclass(frozen=True)
class _Segment:
    kind: str  # code | line_comment | block_comment | string
    start: int
    end: int


def _segment(text: str) -> tuple[list[_Segment], list[str]]:
    segments: list[_Segment] = []
    diagnostics: list[str] = []
    n = len(text)
    i = 0
    code_start = 0

    def close_code(upto: int) -> None:
        if upto > code_start:
            segments.append(_Segment("code", code_start, upto))

    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if ch == "/" and nxt == "/":
            close_code(i)
            end = text.find("\n", i)
            end = n if end == -1 else end
            segments.append(_Segment("line_comment", i, end))
            i = end
            code_start = i
        elif ch == "/" and nxt == "*":
            close_code(i)
            end = text.find("*/", i + 2)
            if end == -1:
                diagnostics.append(f"unterminated block comment at offset {i}")
                end = n
            else:
                end += 2
            segments.append(_Segment("block_comment", i, end))
            i = end
            code_start = i
        elif ch in "\"'":
            close_code(i)
            quote = ch
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == quote:
                    j += 1
                    break
                if text[j] == "\n":  # tolerate unterminated literal at EOL
                    diagnostics.append(f"unterminated string literal at offset {i}")
                    break
                j += 1
            else:
                diagnostics.append(f"unterminated string literal at offset {i}")
            segments.append(_Segment("string", i, min(j, n)))
            i = min(j, n)
            code_start = i
        else:
            i += 1
    close_code(n)
    return segments, diagnostics


def _mask(text: str, segments: list[_Segment]) -> str:
    """Offset-preserving view for structure scans: comments blanked, string
    interiors blanked (quotes kept so strings stay visible as tokens)."""
    out = list(text)
    for seg in segments:
        if seg.kind in ("line_comment", "block_comment"):
            for k in range(seg.start, seg.end):
                if out[k] != "\n":
                    out[k] = " "
        elif seg.kind == "string":
            for k in range(seg.start + 1, seg.end - 1):
                if out[k] != "\n":
                    out[k] = " "
    return "".join(out)


def _brace_depths(masked: str) -> list[int]:
    """depths[i] = number of unclosed '{' strictly before index i."""
    depths = [0] * (len(masked) + 1)
    d = 0
    for i, ch in enumerate(masked):
        depths[i] = d
        if ch == "{":
            d += 1
        elif ch == "}":
            d = max(0, d - 1)
    depths[len(masked)] = d
    return depths


def _match_brace(masked: str, open_idx: int) -> int:
    """Index one past the brace matching masked[open_idx]; end of text if unbalanced."""
    depth = 0
    for i in range(open_idx, len(masked)):
        ch = masked[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    return len(masked)


def _member_end(masked: str, start: int, limit: int) -> tuple[int, bool]:
    """Scan for the end of a member starting at `start`: the matching '}' of
    its body, or the terminating ';' for bodyless declarations."""
    depth = 0
    i = start
    while i < limit:
        ch = masked[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif depth == 0 and ch == "{":
            return _match_brace(masked, i), True
        elif depth == 0 and ch == ";":
            return i + 1, False
        i += 1
    return limit, False


# ---------------------------------------------------------------------------
# normalization and tokens


def normalize_code(raw: str) -> str:
    """Strip comments, collapse whitespace runs to single spaces, trim.

    String literals are opaque: their contents (including whitespace) survive
    verbatim. Idempotent.
    """
    text, _ = _normalize_code_diag(raw)
    return text


def _normalize_code_diag(raw: str) -> tuple[str, list[str]]:
    segments, diagnostics = _segment(raw)
    merged: list[list] = []  # [is_string, text]
    for seg in segments:
        if seg.kind == "string":
            merged.append([True, raw[seg.start : seg.end]])
        else:
            piece = raw[seg.start : seg.end] if seg.kind == "code" else " "
            if merged and not merged[-1][0]:
                merged[-1][1] += piece
            else:
                merged.append([False, piece])
    parts = [t if is_str else _WS_RUN_RE.sub(" ", t) for is_str, t in merged]
    return "".join(parts).strip(), diagnostics


def lexical_tokens(code: str) -> list[str]:
    return _TOKEN_RE.findall(code)


# ---------------------------------------------------------------------------
# version detection


def detect_version(source_text: str) -> VersionBucket:
    """Bucket a file by its first `pragma solidity` directive.

    Range pragmas bucket by their lower bound (the lowest compiler the file
    admits); missing or unrecognized pragmas map to NO_VERSION.
    """
    segments, _ = _segment(source_text)
    masked = _mask(source_text, segments)
    m = _PRAGMA_RE.search(masked)
    if not m:
        return VersionBucket.NO_VERSION
    literals = _VERSION_LITERAL_RE.findall(m.group(1))
    if not literals:
        return VersionBucket.NO_VERSION
    versions = sorted((int(a), int(b), int(c or 0)) for a, b, c in literals)
    major, minor, _patch = versions[0]
    if major == 0 and 4 <= minor <= 8:
        return VersionBucket(f"0.{minor}")
    return VersionBucket.NO_VERSION


# ---------------------------------------------------------------------------
# signatures


def _split_top_level(text: str, sep: str = ",") -> list[str]:
    parts: list[str] = []
    depth = 0
    buf = []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth = max(0, depth - 1)
        if ch == sep and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return [p.strip() for p in parts if p.strip()]


def canonical_type(param_text: str) -> Optional[str]:
    """Canonical form of one parameter/return declaration.

    Drops data locations and the parameter name, resolves elementary aliases
    (uint -> uint256, ...); user-defined types compare by name.
    """
    toks = [t for t in _TOKEN_RE.findall(param_text) if t not in _LOCATION_KEYWORDS]
    if not toks:
        return None
    base = toks.pop(0)
    if base in ("mapping", "function"):
        # composite types are compared by their squashed text
        return base + "".join(toks)
    if base == "address" and toks and toks[0] == "payable":
        toks.pop(0)
    while len(toks) >= 2 and toks[0] == "." and _IDENT_RE.fullmatch(toks[1]):
        base += "." + toks[1]
        toks = toks[2:]
    base = _ELEMENTARY_ALIASES.get(base, base)
    suffix = ""
    while toks and toks[0] == "[":
        depth = 0
        while toks:
            t = toks.pop(0)
            suffix += t
            if t == "[":
                depth += 1
            elif t == "]":
                depth -= 1
                if depth == 0:
                    break
    return base + suffix


def _parse_type_list(text: str) -> list[str]:
    out = []
    for part in _split_top_level(text):
        canon = canonical_type(part)
        if canon:
            out.append(canon)
    return out


def signature_of(record: FunctionRecord) -> Signature:
    return Signature(tuple(record.parameter_types), tuple(record.return_types))


def signatures_compatible(a: FunctionRecord | Signature, b: FunctionRecord | Signature) -> bool:
    sig_a = a if isinstance(a, Signature) else signature_of(a)
    sig_b = b if isinstance(b, Signature) else signature_of(b)
    return sig_a == sig_b


# ---------------------------------------------------------------------------
# header-comment attribution


def _doc_comment_before(text: str, comments: list[_Segment], decl_start: int) -> Optional[str]:
    """NatSpec block (`/** */`) or `///` run immediately preceding a declaration.

    A blank line between the comment and the declaration detaches it; blank
    lines inside a `///` run do not split the run.
    """
    preceding = [c for c in comments if c.end <= decl_start]
    if not preceding:
        return None
    last = preceding[-1]
    gap = text[last.end : decl_start]
    if gap.strip() or gap.count("\n") > 1:
        return None
    raw = text[last.start : last.end]
    if last.kind == "block_comment":
        if not (raw.startswith("/**") and len(raw) > 4):
            return None
        cleaned = _clean_block_comment(raw)
        return cleaned or None
    if not raw.startswith("///"):
        return None
    lines = [raw]
    cur = last
    for prev in reversed(preceding[:-1]):
        if prev.kind != "line_comment":
            break
        praw = text[prev.start : prev.end]
        if not praw.startswith("///"):
            break
        if text[prev.end : cur.start].strip():
            break  # code between the lines ends the run
        lines.append(praw)
        cur = prev
    lines.reverse()
    cleaned = "\n".join(_DOC_LINE_PREFIX_RE.sub("", ln).rstrip() for ln in lines).strip()
    return cleaned or None


def _clean_block_comment(raw: str) -> str:
    inner = raw[3:]
    if inner.endswith("*/"):
        inner = inner[:-2]
    lines = [_BLOCK_GUTTER_RE.sub("", ln).rstrip() for ln in inner.split("\n")]
    return "\n".join(lines).strip()


# ---------------------------------------------------------------------------
# state variables


_ASSIGN_RE = re.compile(r"(?<![=!<>+\-*/%&|^])=(?![=>])")


def _parse_state_var(stmt: str) -> Optional[dict]:
    head = _ASSIGN_RE.split(stmt, maxsplit=1)[0]  # drop any initializer
    toks = _TOKEN_RE.findall(head)
    if len(toks) < 2:
        return None
    if toks[0] in ("using", "emit", "return", "revert", "require", "assert", "if", "for", "while", "assembly", "pragma", "import"):
        return None
    if not _IDENT_RE.fullmatch(toks[-1]):
        return None
    name = toks[-1]
    type_toks = [t for t in toks[:-1] if t not in _VAR_MODIFIER_KEYWORDS]
    if not type_toks:
        return None
    type_text = " ".join(type_toks)
    type_text = re.sub(r"\s*([(\[\].])\s*", r"\1", type_text)
    type_text = re.sub(r"\s*([)\]])", r"\1", type_text).strip()
    return {"name": name, "type": type_text}


# ---------------------------------------------------------------------------
# extraction


def extract_file(source_file: SourceFile) -> FileExtraction:
    """Scan one source file into contracts and function records."""
    text = source_file.raw_text
    segments, seg_diags = _segment(text)
    masked = _mask(text, segments)
    depths = _brace_depths(masked)
    comments = [s for s in segments if s.kind in ("line_comment", "block_comment")]
    version = detect_version(text)

    result = FileExtraction(file_id=source_file.file_id, version=version)
    result.diagnostics.extend(seg_diags)

    scan_pos = 0
    for cm in _CONTRACT_RE.finditer(masked):
        if cm.start() < scan_pos:
            continue  # inside the previous contract's body
        kind, name = cm.group(1), cm.group(2)
        open_idx = masked.find("{", cm.end())
        if open_idx == -1:
            result.diagnostics.append(f"{kind} {name}: no body found")
            scan_pos = cm.end()
            continue
        body_end = _match_brace(masked, open_idx)
        contract_id = f"{source_file.file_id}:{name}"
        info = ContractInfo(contract_id=contract_id, name=name, kind=kind)
        _extract_members(
            source_file, text, masked, depths, comments, version, info,
            open_idx + 1, body_end - 1, result,
        )
        result.contracts.append(info)
        scan_pos = body_end

    if not result.functions:
        result.diagnostics.append("no function declarations found")
    return result


def _extract_members(
    source_file: SourceFile,
    text: str,
    masked: str,
    depths: list[int],
    comments: list[_Segment],
    version: VersionBucket,
    info: ContractInfo,
    body_start: int,
    body_end: int,
    result: FileExtraction,
) -> None:
    member_depth = depths[body_start]
    member_spans: list[tuple[int, int]] = []
    overload_counts: dict[str, int] = {}
    functions: list[FunctionRecord] = []

    pos = body_start
    for mm in _MEMBER_RE.finditer(masked, body_start, body_end):
        if mm.start() < pos or depths[mm.start()] != member_depth:
            continue
        span_end, _has_body = _member_end(masked, mm.end(), body_end)
        member_spans.append((mm.start(), span_end))
        pos = span_end
        if mm.group(1) != "function":
            continue

        nm = re.compile(r"\s*(" + _IDENT + r")?").match(masked, mm.end())
        fn_name = nm.group(1) or ""
        paren = masked.find("(", nm.end())
        if paren == -1 or paren >= span_end or masked[nm.end() : paren].strip():
            result.diagnostics.append(
                f"{info.name}: unparseable function declaration at offset {mm.start()}"
            )
            continue
        params_end = _match_paren(masked, paren)
        header_end = _header_end(masked, params_end, span_end)
        header = masked[params_end:header_end]

        vis_match = _VISIBILITY_RE.search(header)
        visibility = vis_match.group(1) if vis_match else "default"

        returns_types: list[str] = []
        rm = re.search(r"\breturns\b", header)
        if rm:
            ropen = header.find("(", rm.end())
            if ropen != -1:
                rclose = _match_paren(header, ropen)
                returns_types = _parse_type_list(header[ropen + 1 : rclose - 1])

        param_types = _parse_type_list(masked[paren + 1 : params_end - 1])

        raw_decl = text[mm.start() : span_end]
        function_code, norm_diags = _normalize_code_diag(raw_decl)
        result.diagnostics.extend(f"{info.name}.{fn_name}: {d}" for d in norm_diags)

        ordinal = overload_counts.get(fn_name, 0)
        overload_counts[fn_name] = ordinal + 1

        record = FunctionRecord(
            function_id=f"{info.contract_id}#{fn_name}#{ordinal}",
            contract_id=info.contract_id,
            contract_name=info.name,
            solidity_version=version,
            contract_variables=[],  # filled below once vars are known
            function_name=fn_name,
            function_visibility=visibility,
            token_length=len(lexical_tokens(function_code)),
            function_code=function_code,
            function_comment=_doc_comment_before(text, comments, mm.start()),
            char_length=len(function_code),
            parameter_types=param_types,
            return_types=returns_types,
        )
        record.accepted = passes_filters(record, DEFAULT_MIN_COMMENT_TOKENS)
        functions.append(record)

    info.variables = _contract_variables(masked, body_start, body_end, member_spans)
    for record in functions:
        record.contract_variables = info.variables
    result.functions.extend(functions)


def _contract_variables(
    masked: str, body_start: int, body_end: int, member_spans: list[tuple[int, int]]
) -> list[dict]:
    pieces = []
    pos = body_start
    for start, end in member_spans:
        pieces.append(masked[pos:start])
        pos = end
    pieces.append(masked[pos:body_end])
    variables = []
    for stmt in "".join(pieces).split(";"):
        parsed = _parse_state_var(stmt)
        if parsed:
            variables.append(parsed)
    return variables


def _match_paren(masked: str, open_idx: int) -> int:
    depth = 0
    for i in range(open_idx, len(masked)):
        ch = masked[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return i + 1
    return len(masked)


def _header_end(masked: str, start: int, span_end: int) -> int:
    depth = 0
    for i in range(start, span_end):
        ch = masked[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif depth == 0 and ch in "{;":
            return i
    return span_end


def extract_functions(source_file: SourceFile) -> list[FunctionRecord]:
    return extract_file(source_file).functions


def passes_filters(record: FunctionRecord, min_comment_tokens: int = DEFAULT_MIN_COMMENT_TOKENS) -> bool:
    """The working-set filter: public/external visibility plus a header
    comment of at least `min_comment_tokens` whitespace-separated tokens."""
    if min_comment_tokens < 0:
        raise ValueError("min_comment_tokens must be >= 0")
    if record.function_visibility not in ("public", "external"):
        return False
    if not record.function_comment:
        return False
    return len(record.function_comment.split()) >= min_comment_tokens
