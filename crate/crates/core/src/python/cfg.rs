//! Per-function control-flow graphs and cyclomatic complexity.
//!
//! Decision points are `if`/`elif`, `for`, `while` and each `except` handler.
//! Boolean operators, conditional expressions and comprehensions do not add
//! edges. Statements following an unconditional jump start a fresh block
//! without predecessors.

use super::ast::*;

#[derive(Debug, Clone)]
pub struct FunctionCfg {
    pub name: String,
    pub line: u32,
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl FunctionCfg {
    /// `E - N + 2` for a single connected graph.
    pub fn cyclomatic(&self) -> usize {
        (self.edges.len() + 2).saturating_sub(self.nodes)
    }
}

const ENTRY: usize = 0;
const EXIT: usize = 1;

struct Builder {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    loops: Vec<(usize, usize)>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            nodes: 2,
            edges: Vec::new(),
            loops: Vec::new(),
        }
    }

    fn block(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.edges.push((a, b));
    }

    fn seq(&mut self, body: &[Stmt], mut cur: Option<usize>) -> Option<usize> {
        for s in body {
            let c = match cur {
                Some(c) => c,
                None => self.block(),
            };
            cur = self.stmt(s, c);
        }
        cur
    }

    fn join(&mut self, ends: &[Option<usize>]) -> Option<usize> {
        let live: Vec<usize> = ends.iter().flatten().copied().collect();
        if live.is_empty() {
            return None;
        }
        let j = self.block();
        for e in live {
            self.edge(e, j);
        }
        Some(j)
    }

    fn stmt(&mut self, s: &Stmt, cur: usize) -> Option<usize> {
        match &s.kind {
            StmtKind::Return(_) | StmtKind::Raise { .. } => {
                self.edge(cur, EXIT);
                None
            }
            StmtKind::Break => {
                if let Some(&(_, brk)) = self.loops.last() {
                    self.edge(cur, brk);
                }
                None
            }
            StmtKind::Continue => {
                if let Some(&(head, _)) = self.loops.last() {
                    self.edge(cur, head);
                }
                None
            }
            StmtKind::If { body, orelse, .. } => {
                let then_b = self.block();
                self.edge(cur, then_b);
                let then_end = self.seq(body, Some(then_b));
                let else_end = if orelse.is_empty() {
                    Some(cur)
                } else {
                    let else_b = self.block();
                    self.edge(cur, else_b);
                    self.seq(orelse, Some(else_b))
                };
                self.join(&[then_end, else_end])
            }
            StmtKind::While { body, orelse, .. } | StmtKind::For { body, orelse, .. } => {
                let head = self.block();
                self.edge(cur, head);
                let body_b = self.block();
                self.edge(head, body_b);
                let after = self.block();
                let exhausted = if orelse.is_empty() {
                    Some(head)
                } else {
                    let else_b = self.block();
                    self.edge(head, else_b);
                    self.seq(orelse, Some(else_b))
                };
                self.loops.push((head, after));
                let body_end = self.seq(body, Some(body_b));
                self.loops.pop();
                if let Some(e) = body_end {
                    self.edge(e, head);
                }
                if let Some(e) = exhausted {
                    self.edge(e, after);
                }
                Some(after)
            }
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                let body_b = self.block();
                self.edge(cur, body_b);
                let mut ends = Vec::new();
                let body_end = self.seq(body, Some(body_b));
                ends.push(self.seq(orelse, body_end));
                for h in handlers {
                    let hb = self.block();
                    self.edge(cur, hb);
                    ends.push(self.seq(&h.body, Some(hb)));
                }
                let after = self.join(&ends);
                if finalbody.is_empty() {
                    after
                } else {
                    // `finally` runs on every path; unreachable-after-try still
                    // executes it on the way out
                    let fb = match after {
                        Some(a) => a,
                        None => self.block(),
                    };
                    let end = self.seq(finalbody, Some(fb));
                    if after.is_some() {
                        end
                    } else {
                        if let Some(e) = end {
                            self.edge(e, EXIT);
                        }
                        None
                    }
                }
            }
            StmtKind::With { body, .. } => self.seq(body, Some(cur)),
            _ => Some(cur),
        }
    }
}

fn function_cfg(f: &FunctionDef, line: u32) -> FunctionCfg {
    let mut b = Builder::new();
    let first = b.block();
    b.edge(ENTRY, first);
    if let Some(end) = b.seq(&f.body, Some(first)) {
        b.edge(end, EXIT);
    }
    FunctionCfg {
        name: f.name.name.clone(),
        line,
        nodes: b.nodes,
        edges: b.edges,
    }
}

/// Builds one graph per function or method, nested functions included, in
/// source order.
pub fn function_cfgs(module: &Module) -> Vec<FunctionCfg> {
    let mut out = Vec::new();
    walk_stmts(&module.body, &mut |s| {
        if let StmtKind::FunctionDef(f) = &s.kind {
            out.push(function_cfg(f, s.line));
        }
    });
    out
}

/// Decision points in `body`, not descending into nested function bodies.
pub fn local_decisions(body: &[Stmt]) -> usize {
    let mut n = 0;
    for s in body {
        n += match &s.kind {
            StmtKind::If { .. } | StmtKind::For { .. } | StmtKind::While { .. } => 1,
            StmtKind::Try { handlers, .. } => handlers.len(),
            _ => 0,
        };
        match &s.kind {
            StmtKind::FunctionDef(_) => {}
            StmtKind::ClassDef(c) => n += local_decisions(&c.body),
            _ => {
                for b in s.blocks() {
                    n += local_decisions(b);
                }
            }
        }
    }
    n
}

/// Total cyclomatic complexity of a module: the sum over all functions plus
/// the decision points of module- and class-level code.
pub fn cyclomatic_total(module: &Module) -> usize {
    let funcs: usize = function_cfgs(module).iter().map(FunctionCfg::cyclomatic).sum();
    funcs + local_decisions(&module.body)
}

#[cfg(test)]
mod tests {
    use super::super::parse_module;
    use super::*;

    fn cc(src: &str) -> Vec<usize> {
        function_cfgs(&parse_module(src).unwrap())
            .iter()
            .map(FunctionCfg::cyclomatic)
            .collect()
    }

    #[test]
    fn straight_line_is_one() {
        assert_eq!(cc("def f(x):\n    y = x\n    return y\n"), vec![1]);
    }

    #[test]
    fn branches_and_loops() {
        let src = "def f(xs):\n    total = 0\n    for x in xs:\n        if x > 0 and x < 9:\n            total += x\n        elif x == 0:\n            continue\n        else:\n            break\n    while total > 100:\n        total -= 1\n    return total\n";
        // for, if, elif, while
        assert_eq!(cc(src), vec![5]);
    }

    #[test]
    fn handlers_count_and_dead_code() {
        let src = "def f(x):\n    try:\n        return int(x)\n    except ValueError:\n        return 0\n    except TypeError:\n        pass\n    finally:\n        x = None\n    return 1\n    y = 2\n";
        assert_eq!(cc(src), vec![3]);
    }

    #[test]
    fn nested_functions_are_separate() {
        let src = "def outer(a):\n    def inner(b):\n        if b:\n            return 1\n        return 2\n    return inner(a) if a else 0\n";
        assert_eq!(cc(src), vec![1, 2]);
    }

    #[test]
    fn module_level_decisions_are_added() {
        let m = parse_module("import sys\nif __name__ == '__main__':\n    sys.exit(0)\n").unwrap();
        assert_eq!(cyclomatic_total(&m), 1);
    }
}
