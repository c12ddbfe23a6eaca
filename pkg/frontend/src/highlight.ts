// Minimal Solidity token classifier for display. Tokens partition the input
// exactly, so the rendered text is always byte-equal to the service payload.

export interface HighlightToken {
  text: string;
  kind: "keyword" | "type" | "comment" | "string" | "number" | "plain";
}

const KEYWORDS = new Set([
  "function", "contract", "library", "interface", "public", "external",
  "internal", "private", "pure", "view", "payable", "returns", "return",
  "require", "revert", "assert", "emit", "event", "if", "else", "while",
  "for", "mapping", "struct", "enum", "modifier", "constructor", "memory",
  "storage", "calldata", "virtual", "override", "unchecked", "assembly",
  "pragma", "solidity", "using", "new", "delete", "true", "false",
]);

const TYPE_RE = /^(u?int\d*|bytes\d*|address|bool|string|byte)$/;
const TOKEN_RE =
  /(\/\/[^\n]*|\/\*[\s\S]*?\*\/|"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*'|0x[0-9a-fA-F]+|\d+|[A-Za-z_$][A-Za-z0-9_$]*|\s+|[\s\S])/g;

export function highlight(code: string): HighlightToken[] {
  const tokens: HighlightToken[] = [];
  for (const match of code.match(TOKEN_RE) ?? []) {
    let kind: HighlightToken["kind"] = "plain";
    if (match.startsWith("//") || match.startsWith("/*")) kind = "comment";
    else if (match.startsWith('"') || match.startsWith("'")) kind = "string";
    else if (/^(0x[0-9a-fA-F]+|\d+)$/.test(match)) kind = "number";
    else if (TYPE_RE.test(match)) kind = "type";
    else if (KEYWORDS.has(match)) kind = "keyword";
    tokens.push({ text: match, kind });
  }
  return tokens;
}

export function plainText(tokens: HighlightToken[]): string {
  return tokens.map((t) => t.text).join("");
}
