//! Lexical approximations of MIR-level properties, computed from a code
//! snippet alone.
//!
//! The tokenizer is deliberately small: identifiers, lifetimes, numbers,
//! a handful of multi-character operators and single-character punctuation.
//! String/char literals and comments are skipped (comments are counted per
//! line for comment density).

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokKind {
    Ident,
    Lifetime,
    Number,
    Punct,
}

#[derive(Debug, Clone)]
pub(crate) struct Token<'a> {
    pub kind: TokKind,
    pub text: &'a str,
    /// 0-based line within the snippet.
    pub line: usize,
    /// Whitespace (or a comment) separates this token from the previous one.
    pub spaced: bool,
}

const MULTI_PUNCT: &[&str] = &["::", "->", "=>", "&&", "||", "==", "!=", "<=", ">=", "..."];

pub(crate) struct Lexed<'a> {
    pub tokens: Vec<Token<'a>>,
    /// Lines containing at least one comment.
    pub comment_lines: usize,
    pub doc_comment: bool,
}

pub(crate) fn tokenize(src: &str) -> Lexed<'_> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut comment_line_set = std::collections::BTreeSet::new();
    let mut doc_comment = false;
    let (mut i, mut line, mut spaced) = (0usize, 0usize, false);
    let is_ident_start = |b: u8| b.is_ascii_alphabetic() || b == b'_' || b >= 0x80;
    let is_ident_char = |b: u8| b.is_ascii_alphanumeric() || b == b'_' || b >= 0x80;

    while i < bytes.len() {
        let b = bytes[i];
        if b == b'\n' {
            line += 1;
            i += 1;
            spaced = true;
            continue;
        }
        if b.is_ascii_whitespace() {
            i += 1;
            spaced = true;
            continue;
        }
        if src[i..].starts_with("//") {
            if src[i..].starts_with("///") || src[i..].starts_with("//!") {
                doc_comment = true;
            }
            comment_line_set.insert(line);
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            spaced = true;
            continue;
        }
        if src[i..].starts_with("/*") {
            comment_line_set.insert(line);
            i += 2;
            while i < bytes.len() && !src[i..].starts_with("*/") {
                if bytes[i] == b'\n' {
                    line += 1;
                    comment_line_set.insert(line);
                }
                i += 1;
            }
            i = (i + 2).min(bytes.len());
            spaced = true;
            continue;
        }
        if b == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                if bytes[i] == b'\\' {
                    i += 1;
                } else if bytes[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
            i = (i + 1).min(bytes.len());
            spaced = false;
            continue;
        }
        if b == b'\'' {
            // Lifetime `'a` unless it closes like a char literal `'a'`.
            let start = i;
            let mut j = i + 1;
            if j < bytes.len() && is_ident_start(bytes[j]) {
                while j < bytes.len() && is_ident_char(bytes[j]) {
                    j += 1;
                }
                if j >= bytes.len() || bytes[j] != b'\'' {
                    tokens.push(Token { kind: TokKind::Lifetime, text: &src[start..j], line, spaced });
                    i = j;
                    spaced = false;
                    continue;
                }
            }
            // Char literal.
            j = i + 1;
            while j < bytes.len() && bytes[j] != b'\'' && bytes[j] != b'\n' {
                if bytes[j] == b'\\' {
                    j += 1;
                }
                j += 1;
            }
            i = (j + 1).min(bytes.len());
            spaced = false;
            continue;
        }
        if is_ident_start(b) {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            // Keep char boundaries intact for non-ASCII identifiers.
            while !src.is_char_boundary(i) {
                i += 1;
            }
            tokens.push(Token { kind: TokKind::Ident, text: &src[start..i], line, spaced });
            spaced = false;
            continue;
        }
        if b.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token { kind: TokKind::Number, text: &src[start..i], line, spaced });
            spaced = false;
            continue;
        }
        if let Some(op) = MULTI_PUNCT.iter().find(|op| src[i..].starts_with(**op)) {
            tokens.push(Token { kind: TokKind::Punct, text: &src[i..i + op.len()], line, spaced });
            i += op.len();
            spaced = false;
            continue;
        }
        let ch_len = src[i..].chars().next().map_or(1, char::len_utf8);
        tokens.push(Token { kind: TokKind::Punct, text: &src[i..i + ch_len], line, spaced });
        i += ch_len;
        spaced = false;
    }
    Lexed { tokens, comment_lines: comment_line_set.len(), doc_comment }
}

const SMART_POINTERS: &[&str] = &[
    "Box", "Rc", "Arc", "Weak", "RefCell", "Cell", "UnsafeCell", "Mutex", "RwLock", "NonNull",
    "ManuallyDrop", "Pin", "Cow",
];
const CELLS: &[&str] = &["Cell", "RefCell", "UnsafeCell"];
const PANIC_TOKENS: &[&str] = &[
    "panic", "unwrap", "expect", "assert", "assert_eq", "assert_ne", "debug_assert",
    "debug_assert_eq", "debug_assert_ne", "unreachable",
];
const ASSERT_TOKENS: &[&str] = &["assert", "assert_eq", "assert_ne", "debug_assert", "debug_assert_eq", "debug_assert_ne"];
const BYPASS_OPS: &[&str] = &[
    "set_len", "transmute", "transmute_copy", "read", "read_unaligned", "write", "copy",
    "copy_nonoverlapping", "from_raw_parts", "from_raw_parts_mut", "get_unchecked",
    "get_unchecked_mut", "uninitialized", "assume_init", "from_raw", "as_ptr", "as_mut_ptr",
    "offset", "add",
];
/// Calls that can run caller-supplied code (closures, trait impls, destructors).
const DANGER_OPS: &[&str] = &[
    "drop", "clone", "retain", "borrow", "borrow_mut", "call", "call_mut", "call_once", "next",
    "eq", "cmp", "partial_cmp", "hash", "fmt", "deref", "deref_mut", "as_ref", "as_mut", "f", "g",
    "func", "pred", "closure", "callback",
];
const DECL_KEYWORDS: &[&str] = &["fn", "struct", "enum", "trait", "type", "union"];
const LOOP_KEYWORDS: &[&str] = &["while", "for", "loop"];

/// Raw lexical measurements of a snippet.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SnippetStats {
    pub empty: bool,
    pub generic_params: usize,
    pub trait_bounds: usize,
    pub lifetime_params: usize,
    pub generic_nesting_depth: usize,
    pub static_lifetime: bool,
    pub where_clause: bool,
    pub impl_trait: bool,
    pub dyn_trait: bool,
    pub fn_trait_bound: bool,
    pub ident_tokens: usize,
    pub borrows: usize,
    pub mut_borrows: usize,
    pub borrow_nesting_depth: usize,
    pub smart_pointers: usize,
    pub boxes: bool,
    pub rc_arc: bool,
    pub cells: bool,
    pub raw_pointers: usize,
    pub move_closure: bool,
    pub as_casts: usize,
    pub branches: usize,
    pub loops: usize,
    pub loop_nesting_depth: usize,
    pub panic_paths: usize,
    pub unwraps: usize,
    pub explicit_panic: bool,
    pub asserts: usize,
    pub early_returns: usize,
    pub max_brace_depth: usize,
    pub unsafe_blocks: usize,
    pub unsafe_fn: bool,
    pub bypass_ops: usize,
    pub danger_ops: usize,
    /// Line distance from the first bypass op to the nearest danger op at or after it.
    pub bypass_to_danger: Option<usize>,
    pub transmute: bool,
    pub set_len: bool,
    pub ptr_read_write: bool,
    pub uninit: bool,
    pub drop_impl: bool,
    pub unsafe_impl_send_sync: bool,
    pub phantom_data: bool,
    pub ffi_extern: bool,
    pub public_api: bool,
    pub lines_of_code: usize,
    pub nonblank_lines: usize,
    pub comment_lines: usize,
    pub doc_comment: bool,
    pub parameters: usize,
    pub self_receiver: bool,
    pub macro_invocations: usize,
    pub elided: bool,
}

impl SnippetStats {
    pub fn analyze(src: &str) -> Self {
        let lexed = tokenize(src);
        let toks = &lexed.tokens;
        let mut s = SnippetStats {
            empty: toks.is_empty(),
            comment_lines: lexed.comment_lines,
            doc_comment: lexed.doc_comment,
            elided: src.contains("..."),
            ..Default::default()
        };
        let nonblank: Vec<&str> = src.lines().filter(|l| !l.trim().is_empty()).collect();
        s.nonblank_lines = nonblank.len();
        let code_lines: std::collections::BTreeSet<usize> = toks.iter().map(|t| t.line).collect();
        s.lines_of_code = code_lines.len();

        let text = |i: usize| toks.get(i).map_or("", |t| t.text);
        let is_ident = |i: usize| toks.get(i).is_some_and(|t| t.kind == TokKind::Ident);

        s.generic_nesting_depth = generic_nesting_depth(toks);
        s.loop_nesting_depth = loop_nesting(toks);
        s.max_brace_depth = max_brace_depth(toks);

        let mut in_impl_header = false;
        let mut borrow_chain = 0usize;
        let mut first_bypass_line: Option<usize> = None;
        let mut danger_lines = Vec::new();
        let mut fn_params_done = false;

        for i in 0..toks.len() {
            let t = &toks[i];
            let next = text(i + 1);
            let prev = if i > 0 { text(i - 1) } else { "" };

            // Reference sigil chains: `&`, `&&`, `&mut`.
            match t.text {
                "&" => {
                    s.borrows += 1;
                    borrow_chain += 1;
                    if next == "mut" {
                        s.mut_borrows += 1;
                    }
                }
                // `&&T` is a double reference; `a && b` is a logical and.
                "&&" if toks.get(i + 1).is_some_and(|n| !n.spaced) && !in_operand_position(toks, i) => {
                    s.borrows += 2;
                    borrow_chain += 2;
                }
                "mut" if prev == "&" => {}
                _ => {
                    s.borrow_nesting_depth = s.borrow_nesting_depth.max(borrow_chain);
                    borrow_chain = 0;
                }
            }

            match t.kind {
                TokKind::Ident => {
                    s.ident_tokens += 1;
                    let w = t.text;
                    if SMART_POINTERS.contains(&w) {
                        s.smart_pointers += 1;
                        s.boxes |= w == "Box";
                        s.rc_arc |= matches!(w, "Rc" | "Arc" | "Weak");
                        s.cells |= CELLS.contains(&w);
                    }
                    match w {
                        "impl" => {
                            in_impl_header = true;
                            if matches!(prev, "->" | "(" | "," | ":" | "<" | "=") {
                                s.impl_trait = true;
                            }
                            if next == "<" {
                                s.add_generic_list(toks, i + 1);
                            }
                            if prev == "unsafe" {
                                let header_end = (i..toks.len()).find(|&j| matches!(text(j), "{" | ";")).unwrap_or(toks.len());
                                if (i..header_end).any(|j| matches!(text(j), "Send" | "Sync")) {
                                    s.unsafe_impl_send_sync = true;
                                }
                            }
                            let header_end = (i..toks.len()).find(|&j| matches!(text(j), "{" | ";")).unwrap_or(toks.len());
                            if (i..header_end).any(|j| text(j) == "Drop") && (i..header_end).any(|j| text(j) == "for") {
                                s.drop_impl = true;
                            }
                        }
                        kw if DECL_KEYWORDS.contains(&kw) && is_ident(i + 1) && text(i + 2) == "<" => {
                            s.add_generic_list(toks, i + 2);
                        }
                        _ => {}
                    }
                    if w == "fn" && !fn_params_done {
                        if let Some((n, has_self)) = fn_parameters(toks, i) {
                            s.parameters = n;
                            s.self_receiver = has_self;
                            fn_params_done = true;
                        }
                    }
                    if w == "fn" && prev == "unsafe" {
                        s.unsafe_fn = true;
                    }
                    if w == "unsafe" && next == "{" {
                        s.unsafe_blocks += 1;
                    }
                    if w == "where" {
                        s.where_clause = true;
                    }
                    if w == "dyn" {
                        s.dyn_trait = true;
                    }
                    if matches!(w, "Fn" | "FnMut" | "FnOnce") {
                        s.fn_trait_bound = true;
                    }
                    if w == "move" && next == "|" {
                        s.move_closure = true;
                    }
                    if w == "as" && i > 0 {
                        s.as_casts += 1;
                    }
                    if matches!(w, "if" | "match") {
                        s.branches += 1;
                    }
                    if LOOP_KEYWORDS.contains(&w) && !(w == "for" && (in_impl_header || next == "<")) {
                        s.loops += 1;
                    }
                    if PANIC_TOKENS.contains(&w) {
                        s.panic_paths += 1;
                    }
                    if matches!(w, "unwrap" | "expect") {
                        s.unwraps += 1;
                    }
                    if w == "panic" && next == "!" {
                        s.explicit_panic = true;
                    }
                    if ASSERT_TOKENS.contains(&w) {
                        s.asserts += 1;
                    }
                    if w == "return" {
                        s.early_returns += 1;
                    }
                    if (w == "const" || w == "mut") && prev == "*" {
                        s.raw_pointers += 1;
                    }
                    if w == "transmute" || w == "transmute_copy" {
                        s.transmute = true;
                    }
                    if w == "set_len" {
                        s.set_len = true;
                    }
                    if matches!(w, "read" | "write" | "read_unaligned" | "write_unaligned") && matches!(prev, "::" | ".") {
                        s.ptr_read_write = true;
                    }
                    if matches!(w, "MaybeUninit" | "uninitialized" | "assume_init" | "zeroed") {
                        s.uninit = true;
                    }
                    if w == "PhantomData" {
                        s.phantom_data = true;
                    }
                    if w == "extern" {
                        s.ffi_extern = true;
                    }
                    if w == "pub" && next != "(" {
                        s.public_api = true;
                    }
                    if next == "!" && text(i + 2) != "=" && toks.get(i + 1).is_some_and(|n| !n.spaced) {
                        s.macro_invocations += 1;
                    }
                    let called = next == "(" || (next == "::" && text(i + 2) == "<");
                    let qualified = matches!(prev, "::" | ".");
                    if called && BYPASS_OPS.contains(&w) && (qualified || matches!(w, "transmute" | "set_len" | "uninitialized")) {
                        s.bypass_ops += 1;
                        first_bypass_line.get_or_insert(t.line);
                    }
                    if called && DANGER_OPS.contains(&w) {
                        s.danger_ops += 1;
                        danger_lines.push(t.line);
                    }
                }
                TokKind::Lifetime => {
                    if t.text == "'static" {
                        s.static_lifetime = true;
                    }
                }
                TokKind::Punct => match t.text {
                    "{" | ";" => in_impl_header = false,
                    "?" => s.early_returns += 1,
                    _ => {}
                },
                TokKind::Number => {}
            }
        }
        s.borrow_nesting_depth = s.borrow_nesting_depth.max(borrow_chain);
        s.bypass_to_danger = first_bypass_line.and_then(|b| {
            danger_lines.iter().filter(|&&d| d >= b).map(|&d| d - b).min()
        });
        s
    }

    /// Counts the parameters of the generic list opening at `open` (a `<` token).
    fn add_generic_list(&mut self, toks: &[Token<'_>], open: usize) {
        let Some(close) = matching_angle(toks, open) else { return };
        for param in split_top_level(toks, open + 1, close) {
            let Some(first) = param.first() else { continue };
            if toks[*first].kind == TokKind::Lifetime {
                self.lifetime_params += 1;
                continue;
            }
            self.generic_params += 1;
            // A bound is a trait bound when it names at least one path (not only lifetimes).
            if let Some(colon) = param.iter().position(|&j| toks[j].text == ":") {
                if param[colon + 1..].iter().any(|&j| toks[j].kind == TokKind::Ident) {
                    self.trait_bounds += 1;
                }
            }
        }
    }

    pub fn cyclomatic_complexity(&self) -> usize {
        if self.empty {
            0
        } else {
            1 + self.branches + self.loops
        }
    }
}

/// True when the token before `i` ends an operand, making `i` a binary operator.
fn in_operand_position(toks: &[Token<'_>], i: usize) -> bool {
    i > 0
        && (matches!(toks[i - 1].kind, TokKind::Number)
            || (toks[i - 1].kind == TokKind::Ident && !matches!(toks[i - 1].text, "mut" | "in" | "return"))
            || matches!(toks[i - 1].text, ")" | "]"))
}

/// Index of the `>` closing the `<` at `open`, or None when unbalanced.
fn matching_angle(toks: &[Token<'_>], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (j, t) in toks.iter().enumerate().skip(open) {
        match t.text {
            "<" => depth += 1,
            ">" => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
            "{" | ";" => return None,
            _ => {}
        }
    }
    None
}

/// Splits token indices in `[start, end)` on commas outside nested brackets.
fn split_top_level(toks: &[Token<'_>], start: usize, end: usize) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new()];
    let mut depth = 0i32;
    for (j, tok) in toks.iter().enumerate().take(end).skip(start) {
        match tok.text {
            "<" | "(" | "[" => depth += 1,
            ">" | ")" | "]" => depth -= 1,
            "," if depth == 0 => {
                parts.push(Vec::new());
                continue;
            }
            _ => {}
        }
        parts.last_mut().unwrap().push(j);
    }
    parts.retain(|p| !p.is_empty());
    parts
}

/// Parameter count and self-receiver flag for the `fn` at `fn_idx`.
fn fn_parameters(toks: &[Token<'_>], fn_idx: usize) -> Option<(usize, bool)> {
    let mut j = fn_idx + 2;
    if toks.get(j).map(|t| t.text) == Some("<") {
        j = matching_angle(toks, j)? + 1;
    }
    if toks.get(j).map(|t| t.text) != Some("(") {
        return None;
    }
    let mut depth = 0i32;
    let close = (j..toks.len()).find(|&k| {
        match toks[k].text {
            "(" => depth += 1,
            ")" => depth -= 1,
            _ => {}
        }
        depth == 0
    })?;
    let params = split_top_level(toks, j + 1, close);
    let has_self = params
        .first()
        .is_some_and(|p| p.iter().take(3).any(|&k| toks[k].text == "self"));
    Some((params.len(), has_self))
}

/// Generic nesting: a `<` glued to a preceding identifier or `::` opens a level.
fn generic_nesting_depth(toks: &[Token<'_>]) -> usize {
    let (mut depth, mut max) = (0usize, 0usize);
    for (i, t) in toks.iter().enumerate() {
        match t.text {
            "<" if i > 0 && !t.spaced && (toks[i - 1].kind == TokKind::Ident || toks[i - 1].text == "::") => {
                depth += 1;
                max = max.max(depth);
            }
            ">" if depth > 0 => depth -= 1,
            "{" | ";" => depth = 0,
            _ => {}
        }
    }
    max
}

fn max_brace_depth(toks: &[Token<'_>]) -> usize {
    let (mut depth, mut max) = (0usize, 0usize);
    for t in toks {
        match t.text {
            "{" => {
                depth += 1;
                max = max.max(depth);
            }
            "}" => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    max
}

/// Maximum number of simultaneously open loop bodies.
fn loop_nesting(toks: &[Token<'_>]) -> usize {
    let mut stack: Vec<bool> = Vec::new();
    let mut pending_loop = false;
    let mut in_impl_header = false;
    let mut max = 0usize;
    for (i, t) in toks.iter().enumerate() {
        match t.text {
            "impl" => in_impl_header = true,
            "for" if in_impl_header || toks.get(i + 1).is_some_and(|n| n.text == "<") => {}
            "while" | "for" | "loop" if t.kind == TokKind::Ident => pending_loop = true,
            "{" => {
                stack.push(pending_loop);
                pending_loop = false;
                in_impl_header = false;
                max = max.max(stack.iter().filter(|&&l| l).count());
            }
            "}" => {
                stack.pop();
            }
            ";" => in_impl_header = false,
            _ => {}
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_params_and_bounds() {
        let s = SnippetStats::analyze("fn f<T: Clone, U>(x: &T) {}");
        assert_eq!(s.generic_params, 2);
        assert_eq!(s.trait_bounds, 1);
        assert_eq!(s.parameters, 1);
        assert!(!s.self_receiver);
        assert_eq!(s.borrows, 1);
    }

    #[test]
    fn impl_drop_listing() {
        let s = SnippetStats::analyze("impl<T: 'static> Drop for Arc<T> {...} }");
        assert_eq!(s.generic_params, 1);
        assert_eq!(s.trait_bounds, 0, "'static is a lifetime bound");
        assert!(s.static_lifetime);
        assert!(s.drop_impl);
        assert_eq!(s.loops, 0, "`for` in an impl header is not a loop");
        assert!(s.elided);
        assert_eq!(s.smart_pointers, 1);
        assert!(s.rc_arc);
    }

    #[test]
    fn unsafe_retain_listing() {
        let src = "fn unsafe_retain(v: &mut Vec<u8>) {\n    let len = v.len();\n    unsafe { v.set_len(0); } // invariant broken\n    // if closure panics here, destructor runs\n    // on invalid state -> use-after-free\n    v.retain(|x| *x > 0);\n    unsafe { v.set_len(len); }\n}";
        let s = SnippetStats::analyze(src);
        assert_eq!(s.unsafe_blocks, 2);
        assert!(s.set_len);
        assert_eq!(s.bypass_ops, 2);
        assert_eq!(s.danger_ops, 1);
        assert_eq!(s.bypass_to_danger, Some(3));
        assert_eq!(s.comment_lines, 3);
        assert_eq!(s.lines_of_code, 6);
        assert_eq!(s.nonblank_lines, 8);
        assert_eq!(s.mut_borrows, 1);
        assert_eq!(s.cyclomatic_complexity(), 1);
    }

    #[test]
    fn control_flow_counts() {
        let src = "fn g(&self, n: usize) -> Option<u8> {\n for i in 0..n { while true { if i > 2 { return None; } } }\n let x = foo()?; x.unwrap(); assert!(n > 0); panic!(\"x\");\n}";
        let s = SnippetStats::analyze(src);
        assert_eq!(s.loops, 2);
        assert_eq!(s.branches, 1);
        assert_eq!(s.loop_nesting_depth, 2);
        assert_eq!(s.max_brace_depth, 4);
        assert_eq!(s.early_returns, 2);
        assert_eq!(s.panic_paths, 3);
        assert!(s.explicit_panic);
        assert_eq!(s.asserts, 1);
        assert_eq!(s.macro_invocations, 2);
        assert_eq!(s.parameters, 2);
        assert!(s.self_receiver);
        assert_eq!(s.cyclomatic_complexity(), 4);
    }

    #[test]
    fn nesting_and_pointers() {
        let s = SnippetStats::analyze("pub unsafe fn h(p: *const u8, q: &&Vec<Box<Rc<T>>>) where T: Send { let r = p as *mut u8; }");
        assert_eq!(s.generic_nesting_depth, 3);
        assert_eq!(s.borrow_nesting_depth, 2);
        assert_eq!(s.raw_pointers, 2);
        assert!(s.unsafe_fn);
        assert!(s.public_api);
        assert!(s.where_clause);
        assert_eq!(s.as_casts, 1);
        assert!(s.boxes && s.rc_arc);
    }

    #[test]
    fn empty_snippet() {
        let s = SnippetStats::analyze("");
        assert!(s.empty);
        assert_eq!(s.cyclomatic_complexity(), 0);
        assert_eq!(s, SnippetStats { empty: true, ..Default::default() });
    }

    #[test]
    fn send_sync_impl() {
        let s = SnippetStats::analyze("unsafe impl<T> Send for Guard<T> {}");
        assert!(s.unsafe_impl_send_sync);
        assert_eq!(s.generic_params, 1);
    }

    #[test]
    fn literals_and_lifetimes() {
        let lx = tokenize("let c = 'x'; let s = \"a { b\"; fn f<'a>(x: &'a str) {}");
        assert!(lx.tokens.iter().all(|t| t.text != "{" || t.line == 0));
        let lifetimes: Vec<_> = lx.tokens.iter().filter(|t| t.kind == TokKind::Lifetime).map(|t| t.text).collect();
        assert_eq!(lifetimes, vec!["'a", "'a"]);
        let s = SnippetStats::analyze("fn f<'a, T>(x: &'a T) {}");
        assert_eq!(s.lifetime_params, 1);
        assert_eq!(s.generic_params, 1);
    }
}
