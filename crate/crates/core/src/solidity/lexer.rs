use std::ops::Range;

use crate::diagnostic::Location;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Punctuation,
    StringLiteral,
    NumberLiteral,
    Comment,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte range in the source.
    pub span: Range<usize>,
    pub line: u32,
    pub column: u32,
}

impl Token {
    pub fn location(&self) -> Location {
        Location::new(self.line, self.column)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.text == p
    }

    /// Keyword or identifier with exactly this text.
    pub fn is_word(&self, w: &str) -> bool {
        matches!(self.kind, TokenKind::Keyword | TokenKind::Identifier) && self.text == w
    }
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "address",
    "anonymous",
    "as",
    "assembly",
    "bool",
    "break",
    "byte",
    "bytes",
    "calldata",
    "catch",
    "constant",
    "constructor",
    "continue",
    "contract",
    "delete",
    "do",
    "else",
    "emit",
    "enum",
    "error",
    "event",
    "external",
    "fallback",
    "false",
    "for",
    "function",
    "if",
    "immutable",
    "import",
    "indexed",
    "interface",
    "internal",
    "is",
    "library",
    "mapping",
    "memory",
    "modifier",
    "new",
    "override",
    "payable",
    "pragma",
    "private",
    "public",
    "pure",
    "receive",
    "return",
    "returns",
    "revert",
    "storage",
    "string",
    "struct",
    "throw",
    "true",
    "try",
    "type",
    "unchecked",
    "using",
    "view",
    "virtual",
    "while",
];

/// Elementary type names (`uint256`, `bytes32`, `address`, ...).
pub fn is_elementary_type(word: &str) -> bool {
    fn sized(word: &str, prefix: &str) -> bool {
        word.strip_prefix(prefix)
            .is_some_and(|rest| rest.is_empty() || rest.bytes().all(|b| b.is_ascii_digit()))
    }
    matches!(word, "address" | "bool" | "string" | "byte")
        || sized(word, "uint")
        || sized(word, "int")
        || sized(word, "bytes")
        || word.starts_with("fixed")
        || word.starts_with("ufixed")
}

fn is_keyword(word: &str) -> bool {
    KEYWORDS.binary_search(&word).is_ok() || is_elementary_type(word)
}

const PUNCT3: &[&str] = &[">>>", "<<=", ">>=", "**="];
const PUNCT2: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "=>", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "++",
    "--", "**", "<<", ">>", "->", ":=",
];
const PUNCT1: &str = "{}()[];,.=+-*/%<>!&|^~?:";

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }
}

/// Split Solidity source into tokens. Total: every character is either
/// whitespace or part of exactly one token.
pub fn tokenize(source: &str) -> Vec<Token> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let start = cur.pos;
        let (line, column) = (cur.line, cur.column);
        let kind = lex_one(&mut cur, c);
        tokens.push(Token {
            kind,
            text: source[start..cur.pos].to_string(),
            span: start..cur.pos,
            line,
            column,
        });
    }
    tokens
}

fn lex_one(cur: &mut Cursor<'_>, c: char) -> TokenKind {
    if c == '/' && cur.peek_at(1) == Some('/') {
        cur.eat_while(|c| c != '\n');
        return TokenKind::Comment;
    }
    if c == '/' && cur.peek_at(1) == Some('*') {
        cur.bump();
        cur.bump();
        loop {
            match cur.bump() {
                None => break,
                Some('*') if cur.peek() == Some('/') => {
                    cur.bump();
                    break;
                }
                Some(_) => {}
            }
        }
        return TokenKind::Comment;
    }
    if c == '"' || c == '\'' {
        cur.bump();
        while let Some(n) = cur.peek() {
            if n == '\n' {
                break;
            }
            cur.bump();
            if n == '\\' {
                if cur.peek().is_some_and(|e| e != '\n') {
                    cur.bump();
                }
            } else if n == c {
                break;
            }
        }
        return TokenKind::StringLiteral;
    }
    if c.is_ascii_digit() {
        cur.bump();
        loop {
            match cur.peek() {
                Some(n) if n.is_ascii_alphanumeric() || n == '_' => {
                    cur.bump();
                }
                Some('.') if cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                    cur.bump();
                }
                _ => break,
            }
        }
        return TokenKind::NumberLiteral;
    }
    if is_ident_start(c) {
        let start = cur.pos;
        cur.eat_while(is_ident_continue);
        let word = &cur.src[start..cur.pos];
        return if is_keyword(word) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
    }
    let rest = &cur.src[cur.pos..];
    for group in [PUNCT3, PUNCT2] {
        if let Some(p) = group.iter().find(|p| rest.starts_with(**p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            return TokenKind::Punctuation;
        }
    }
    cur.bump();
    if PUNCT1.contains(c) {
        TokenKind::Punctuation
    } else {
        TokenKind::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn keyword_table_is_sorted() {
        let mut sorted = KEYWORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, KEYWORDS);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \n\t ").is_empty());
    }

    #[test]
    fn msg_sender() {
        assert_eq!(
            texts("msg.sender"),
            vec![
                (TokenKind::Identifier, "msg".into()),
                (TokenKind::Punctuation, ".".into()),
                (TokenKind::Identifier, "sender".into()),
            ]
        );
    }

    #[test]
    fn require_within_function_snippet() {
        let src = "function fun() public {\n    require(address(owner) == msg.sender);\n}\n";
        let words: Vec<String> = tokenize(src)
            .into_iter()
            .filter(|t| matches!(t.kind, TokenKind::Keyword | TokenKind::Identifier))
            .map(|t| t.text)
            .collect();
        for w in [
            "function", "fun", "require", "address", "owner", "msg", "sender",
        ] {
            assert!(words.iter().any(|x| x == w), "missing {w}");
        }
    }

    #[test]
    fn comments_and_strings_stay_intact() {
        let toks = texts("a // hi\n/* x\ny */ \"q\\\"s\" 'c'");
        assert_eq!(toks[1], (TokenKind::Comment, "// hi".into()));
        assert_eq!(toks[2], (TokenKind::Comment, "/* x\ny */".into()));
        assert_eq!(toks[3], (TokenKind::StringLiteral, "\"q\\\"s\"".into()));
        assert_eq!(toks[4], (TokenKind::StringLiteral, "'c'".into()));
    }

    #[test]
    fn operators_and_numbers() {
        let toks = texts("x+=1e18;y>>>=0x1F;a=>b 1.5");
        let ops: Vec<&str> = toks.iter().map(|(_, t)| t.as_str()).collect();
        assert_eq!(
            ops,
            ["x", "+=", "1e18", ";", "y", ">>>", "=", "0x1F", ";", "a", "=>", "b", "1.5"]
        );
    }

    #[test]
    fn unknown_characters() {
        let toks = texts("a @ é");
        assert_eq!(toks[1].0, TokenKind::Unknown);
        assert_eq!(toks[2], (TokenKind::Unknown, "é".into()));
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("a\n  bc");
        assert_eq!((toks[0].line, toks[0].column), (1, 1));
        assert_eq!((toks[1].line, toks[1].column), (2, 3));
    }

    proptest! {
        #[test]
        fn tokens_plus_whitespace_reproduce_input(src in "\\PC*|[ -~\n\t]{0,200}") {
            let toks = tokenize(&src);
            let mut rebuilt = String::new();
            let mut pos = 0;
            for t in &toks {
                let gap = &src[pos..t.span.start];
                prop_assert!(gap.chars().all(char::is_whitespace));
                rebuilt.push_str(gap);
                prop_assert_eq!(&src[t.span.clone()], t.text.as_str());
                rebuilt.push_str(&t.text);
                pos = t.span.end;
            }
            prop_assert!(src[pos..].chars().all(char::is_whitespace));
            rebuilt.push_str(&src[pos..]);
            prop_assert_eq!(rebuilt, src.clone());
            let lines = src.split('\n').count() as u32;
            for t in &toks {
                prop_assert!(t.line >= 1 && t.line <= lines);
                prop_assert!(t.column >= 1);
            }
        }
    }
}
