//! Gadget emitters for the compiler and the harness generators.
//!
//! Program layout, in command order:
//!
//! ```text
//! Init_1 .. Init_top      fill every complement counter
//! main                    translated source commands or the harness preamble
//! Dec_top .. Dec_1        shared procedure bodies with return dispatch
//! drain loops, halt       nondeterministic drains; acceptance checks them
//! ```
//!
//! `Dec_{k+1}` and `Init_{k+1}` share one counting skeleton that performs
//! exactly 2⇑(k+1) counted steps per completing run:
//!
//! 1. push phase: push 2⇑k zero-digits, counted down against `(u_k', u_k)`,
//!    then verify `u_k' = 0` with a two-pass level-k zero test;
//! 2. increment loop: while the stacked binary number is not all ones, pop
//!    trailing one-digits (counted against `(t_k, t_k')`), flip one zero to
//!    one, push the zeros back, verify `t_k = 0`, and perform one counted
//!    step;
//! 3. final phase: pop the 2⇑k one-digits (counted against `(u_k, u_k')`),
//!    verify `u_k = 0`, and perform one last counted step.
//!
//! The counted step is `dec s_{k+1}; inc s_{k+1}'` in a `Dec` body and one
//! increment of every level-(k+1) complement counter in an `Init` skeleton.
//! Every paired counter update is emitted decrement-first so that no pair
//! ever exceeds its budget, and the in-between command is tagged in the
//! source map as mid-update for the pair.

use crate::counter::{CCommand, CounterProgram};
use crate::exec::ChoicePredicate;
use crate::program::{CounterId, SymbolId};
use crate::yardstick::asm::Asm;
use crate::yardstick::{
    CompiledUnit, LevelEntry, LevelMap, PairInfo, PairRole, Region, SymbolRole,
};

pub(crate) enum Kind<'a> {
    Compile(&'a CounterProgram),
    DecHarness,
    ZtHarness { preload: u64 },
}

#[derive(Clone, Copy)]
struct Pair {
    pos: CounterId,
    neg: CounterId,
    gid: usize,
}

struct Site {
    sym: SymbolId,
    ret: String,
    owner: Region,
}

struct Level {
    s: Pair,
    t: Option<Pair>,
    u: Option<Pair>,
    d0: Option<SymbolId>,
    d1: Option<SymbolId>,
    entry: String,
    sites: Vec<Site>,
    dec_s_cmds: Vec<usize>,
    init_span: (usize, usize),
    body_span: (usize, usize),
    dec_entry_idx: usize,
}

enum StepKind {
    /// `dec s_K; inc s_K'`.
    Dec,
    /// One increment of every level-K complement counter.
    Init,
}

pub(crate) struct Builder<'a> {
    asm: Asm,
    kind: Kind<'a>,
    top: usize,
    levels: Vec<Level>,
    pairs: Vec<PairInfo>,
    /// Source/test pairs at the top level, in source counter order.
    source_pairs: Vec<Pair>,
    source_pair_gids: Vec<usize>,
    symbol_roles: Vec<SymbolRole>,
    epilogue: String,
}

pub(crate) fn build(kind: Kind, top: usize) -> CompiledUnit {
    let mut b = Builder::new(kind, top);
    b.declare();
    b.emit_inits();
    b.emit_main();
    b.emit_bodies();
    b.emit_epilogue();
    b.finish()
}

impl<'a> Builder<'a> {
    fn new(kind: Kind<'a>, top: usize) -> Self {
        assert!(top >= 1);
        let mut asm = Asm::new();
        if let Kind::Compile(cp) = &kind {
            asm.reserve_names(cp.counters().iter().map(|s| s.as_str()));
        }
        let epilogue = asm.fresh_label("epilogue");
        Builder {
            asm,
            kind,
            top,
            levels: Vec::new(),
            pairs: Vec::new(),
            source_pairs: Vec::new(),
            source_pair_gids: Vec::new(),
            symbol_roles: Vec::new(),
            epilogue,
        }
    }

    fn new_pair(&mut self, level: usize, role: PairRole, pos: CounterId, neg: CounterId) -> Pair {
        let gid = self.pairs.len();
        self.pairs.push(PairInfo {
            level,
            role,
            pos,
            neg,
        });
        Pair { pos, neg, gid }
    }

    fn new_symbol(&mut self, base: &str, role: SymbolRole) -> SymbolId {
        let id = self.asm.new_symbol(base);
        debug_assert_eq!(id.0, self.symbol_roles.len());
        self.symbol_roles.push(role);
        id
    }

    fn declare(&mut self) {
        for k in 1..=self.top {
            let s_pos = self.asm.new_counter(&format!("s{k}"));
            let s_neg = self.asm.new_counter(&format!("s{k}'"));
            let s = self.new_pair(k, PairRole::Yardstick, s_pos, s_neg);
            let (t, u, d0, d1) = if k < self.top {
                let t_pos = self.asm.new_counter(&format!("t{k}"));
                let t_neg = self.asm.new_counter(&format!("t{k}'"));
                let u_pos = self.asm.new_counter(&format!("u{k}"));
                let u_neg = self.asm.new_counter(&format!("u{k}'"));
                let d0 = self.new_symbol(&format!("d0_{k}"), SymbolRole::Digit { level: k, one: false });
                let d1 = self.new_symbol(&format!("d1_{k}"), SymbolRole::Digit { level: k, one: true });
                (
                    Some(self.new_pair(k, PairRole::TrailingOnes, t_pos, t_neg)),
                    Some(self.new_pair(k, PairRole::PushCount, u_pos, u_neg)),
                    Some(d0),
                    Some(d1),
                )
            } else {
                (None, None, None, None)
            };
            let entry = self.asm.fresh_label(&format!("dec{k}_entry"));
            self.levels.push(Level {
                s,
                t,
                u,
                d0,
                d1,
                entry,
                sites: Vec::new(),
                dec_s_cmds: Vec::new(),
                init_span: (0, 0),
                body_span: (0, 0),
                dec_entry_idx: 0,
            });
        }
        let source_names: Vec<String> = match &self.kind {
            Kind::Compile(cp) => cp.counters().to_vec(),
            Kind::DecHarness => vec![],
            Kind::ZtHarness { .. } => vec!["x".to_string()],
        };
        for name in source_names {
            let pos = match &self.kind {
                // Source counters keep their own names; everything generated
                // was mangled around them.
                Kind::Compile(_) => self.asm.new_counter_exact(&name),
                _ => self.asm.new_counter(&name),
            };
            let neg = self.asm.new_counter(&format!("{name}'"));
            let pair = self.new_pair(self.top, PairRole::Source, pos, neg);
            self.source_pairs.push(pair);
            self.source_pair_gids.push(pair.gid);
        }
    }

    fn level(&self, k: usize) -> &Level {
        &self.levels[k - 1]
    }

    /// Complement counters of level `k`, the ones its initialization fills.
    fn complements_of(&self, k: usize) -> Vec<CounterId> {
        let mut out = vec![self.level(k).s.neg];
        if let Some(t) = self.level(k).t {
            out.push(t.neg);
        }
        if let Some(u) = self.level(k).u {
            out.push(u.neg);
        }
        if k == self.top {
            out.extend(self.source_pairs.iter().map(|p| p.neg));
        }
        out
    }

    fn emit_inits(&mut self) {
        // Init_1: the level-1 bound is 2, reached by literal increments.
        self.asm.region = Region::Init { level: 1 };
        self.asm.gadget = "Init_1".to_string();
        let start = self.asm.here();
        for c in self.complements_of(1) {
            self.asm.inc(c);
            self.asm.inc(c);
        }
        self.levels[0].init_span = (start, self.asm.here());
        for k in 2..=self.top {
            self.asm.region = Region::Init { level: k };
            let start = self.asm.here();
            self.emit_skeleton(k, StepKind::Init, &format!("Init_{k}"));
            self.levels[k - 1].init_span = (start, self.asm.here());
        }
    }

    fn emit_main(&mut self) {
        self.asm.region = Region::Main;
        match self.kind {
            Kind::Compile(cp) => self.emit_translation(cp),
            Kind::DecHarness => {
                let k = self.top;
                let s = self.level(k).s;
                self.asm.gadget = "harness/charge".to_string();
                // Transfer s_k' fully into s_k, then run Dec_k once.
                let loop_l = self.asm.bind_fresh("charge_loop");
                let body_l = self.asm.fresh_label("charge_body");
                let done_l = self.asm.fresh_label("charge_done");
                self.asm.goto_choice(
                    &body_l,
                    &done_l,
                    ChoicePredicate::Nonzero(s.neg),
                    false,
                );
                self.asm.bind(&body_l);
                self.asm.dec(s.neg);
                self.asm.inc(s.pos);
                self.asm.suspends_pair(s.gid);
                self.asm.goto(&loop_l);
                self.asm.bind(&done_l);
                self.asm.gadget = "harness/call".to_string();
                self.call_dec(k);
                let epilogue = self.epilogue.clone();
                self.asm.goto(&epilogue);
            }
            Kind::ZtHarness { preload } => {
                let k = self.top;
                let x = self.source_pairs[0];
                self.asm.gadget = "harness/preload".to_string();
                for _ in 0..preload {
                    self.asm.dec(x.neg);
                    self.asm.inc(x.pos);
                    self.asm.suspends_pair(x.gid);
                }
                self.emit_double_zt(k, x.pos, x.neg, x.gid, "harness/ztest");
                let epilogue = self.epilogue.clone();
                self.asm.goto(&epilogue);
            }
        }
    }

    fn emit_translation(&mut self, cp: &CounterProgram) {
        let n = self.top;
        let cp_labels: Vec<String> = (0..cp.commands().len())
            .map(|i| self.asm.fresh_label(&format!("src{i}")))
            .collect();
        for (i, cmd) in cp.commands().iter().enumerate() {
            self.asm.source = Some(i);
            self.asm.gadget = format!("translate/{i}");
            self.asm.bind(&cp_labels[i]);
            match *cmd {
                CCommand::Inc(c) => {
                    let x = self.source_pairs[c.0];
                    self.asm.dec(x.neg);
                    self.asm.inc(x.pos);
                    self.asm.suspends_pair(x.gid);
                }
                CCommand::Dec(c) => {
                    let x = self.source_pairs[c.0];
                    self.asm.dec(x.pos);
                    self.asm.inc(x.neg);
                    self.asm.suspends_pair(x.gid);
                }
                CCommand::Goto(t) => {
                    self.asm.goto(&cp_labels[t]);
                }
                CCommand::Ifz(c, then_t, else_t) => {
                    let x = self.source_pairs[c.0];
                    let zero_l = self.asm.fresh_label(&format!("src{i}_zero"));
                    let nonzero_l = self.asm.fresh_label(&format!("src{i}_nonzero"));
                    self.asm.goto_choice(
                        &zero_l,
                        &nonzero_l,
                        ChoicePredicate::Zero(x.pos),
                        false,
                    );
                    self.asm.bind(&zero_l);
                    self.emit_double_zt(n, x.pos, x.neg, x.gid, &format!("translate/{i}/ztest"));
                    self.asm.gadget = format!("translate/{i}");
                    self.asm.goto(&cp_labels[then_t]);
                    // Nonzero probe: net zero effect, aborts exactly when x = 0.
                    self.asm.bind(&nonzero_l);
                    self.asm.dec(x.pos);
                    self.asm.inc(x.neg);
                    self.asm.suspends_pair(x.gid);
                    self.asm.dec(x.neg);
                    self.asm.inc(x.pos);
                    self.asm.suspends_pair(x.gid);
                    self.asm.goto(&cp_labels[else_t]);
                }
                CCommand::Halt => {
                    let epilogue = self.epilogue.clone();
                    self.asm.goto(&epilogue);
                }
            }
        }
        self.asm.source = None;
    }

    fn emit_bodies(&mut self) {
        // Descending, so the call sites inside Dec_{k+1} are registered
        // before Dec_k's dispatch is laid out.
        for k in (1..=self.top).rev() {
            self.asm.region = Region::Body { level: k };
            let start = self.asm.here();
            let entry = self.level(k).entry.clone();
            self.asm.bind(&entry);
            self.levels[k - 1].dec_entry_idx = start;
            if k == 1 {
                self.asm.gadget = "Dec_1".to_string();
                let s = self.level(1).s;
                for _ in 0..2 {
                    let d = self.asm.dec(s.pos);
                    self.levels[0].dec_s_cmds.push(d);
                    self.asm.inc(s.neg);
                    self.asm.suspends_pair(s.gid);
                }
            } else {
                self.emit_skeleton(k, StepKind::Dec, &format!("Dec_{k}"));
            }
            self.emit_dispatch(k);
            self.levels[k - 1].body_span = (start, self.asm.here());
        }
    }

    /// The shared counting skeleton of `Dec_K` and `Init_K` (K >= 2): exactly
    /// 2⇑K counted steps per completing run, driven by a (2⇑(K-1))-digit
    /// binary number of level-(K-1) digits on the stack.
    fn emit_skeleton(&mut self, cap_level: usize, step: StepKind, scope: &str) {
        assert!(cap_level >= 2);
        let k = cap_level - 1;
        let lv = self.level(k);
        let (d0, d1) = (lv.d0.unwrap(), lv.d1.unwrap());
        let t = lv.t.unwrap();
        let u = lv.u.unwrap();

        // (1) Push phase: 2⇑k zero-digits, counted down against (u', u).
        self.asm.gadget = format!("{scope}/push-phase");
        let push_loop = self.asm.bind_fresh("push_loop");
        let push_body = self.asm.fresh_label("push_body");
        let push_done = self.asm.fresh_label("push_done");
        self.asm
            .goto_choice(&push_body, &push_done, ChoicePredicate::Nonzero(u.neg), false);
        self.asm.bind(&push_body);
        self.asm.push(d0);
        self.asm.dec(u.neg);
        self.asm.inc(u.pos);
        self.asm.suspends_pair(u.gid);
        self.asm.goto(&push_loop);
        self.asm.bind(&push_done);
        self.emit_double_zt(k, u.neg, u.pos, u.gid, &format!("{scope}/push-check"));

        // (2) Increment loop.
        self.asm.gadget = format!("{scope}/increment-loop");
        let inc_loop = self.asm.bind_fresh("inc_loop");
        let inc_body = self.asm.fresh_label("inc_body");
        let inc_exit = self.asm.fresh_label("inc_exit");
        self.asm.goto_choice(
            &inc_exit,
            &inc_body,
            ChoicePredicate::AllOnes {
                level: k,
                zero: d0,
                one: d1,
            },
            false,
        );
        self.asm.bind(&inc_body);
        // Pop the run of trailing one-digits, counting into (t, t').
        let ones_loop = self.asm.bind_fresh("ones_loop");
        let ones_body = self.asm.fresh_label("ones_body");
        let ones_done = self.asm.fresh_label("ones_done");
        self.asm
            .goto_choice(&ones_body, &ones_done, ChoicePredicate::Top(d1), false);
        self.asm.bind(&ones_body);
        self.asm.pop(d1);
        self.asm.dec(t.neg);
        self.asm.inc(t.pos);
        self.asm.suspends_pair(t.gid);
        self.asm.goto(&ones_loop);
        self.asm.bind(&ones_done);
        // Flip the zero-digit under the run.
        self.asm.pop(d0);
        self.asm.push(d1);
        // Push the popped count back as zeros.
        let back_loop = self.asm.bind_fresh("back_loop");
        let back_body = self.asm.fresh_label("back_body");
        let back_done = self.asm.fresh_label("back_done");
        self.asm
            .goto_choice(&back_body, &back_done, ChoicePredicate::Nonzero(t.pos), false);
        self.asm.bind(&back_body);
        self.asm.push(d0);
        self.asm.dec(t.pos);
        self.asm.inc(t.neg);
        self.asm.suspends_pair(t.gid);
        self.asm.goto(&back_loop);
        self.asm.bind(&back_done);
        self.emit_double_zt(k, t.pos, t.neg, t.gid, &format!("{scope}/increment-check"));
        self.asm.gadget = format!("{scope}/increment-loop");
        self.emit_step_block(cap_level, &step, scope);
        self.asm.gadget = format!("{scope}/increment-loop");
        self.asm.goto(&inc_loop);

        // (3) Final phase: pop the 2⇑k one-digits, counted against (u, u').
        self.asm.gadget = format!("{scope}/final-phase");
        self.asm.bind(&inc_exit);
        let pop_loop = self.asm.bind_fresh("pop_loop");
        let pop_body = self.asm.fresh_label("pop_body");
        let pop_done = self.asm.fresh_label("pop_done");
        self.asm
            .goto_choice(&pop_body, &pop_done, ChoicePredicate::Nonzero(u.pos), false);
        self.asm.bind(&pop_body);
        self.asm.pop(d1);
        self.asm.dec(u.pos);
        self.asm.inc(u.neg);
        self.asm.suspends_pair(u.gid);
        self.asm.goto(&pop_loop);
        self.asm.bind(&pop_done);
        self.emit_double_zt(k, u.pos, u.neg, u.gid, &format!("{scope}/final-check"));
        self.asm.gadget = format!("{scope}/final-phase");
        self.emit_step_block(cap_level, &step, scope);
    }

    /// One counted step of the skeleton at `cap_level`.
    fn emit_step_block(&mut self, cap_level: usize, step: &StepKind, scope: &str) {
        self.asm.gadget = format!("{scope}/step");
        match step {
            StepKind::Dec => {
                let s = self.level(cap_level).s;
                let d = self.asm.dec(s.pos);
                self.levels[cap_level - 1].dec_s_cmds.push(d);
                self.asm.inc(s.neg);
                self.asm.suspends_pair(s.gid);
            }
            StepKind::Init => {
                for c in self.complements_of(cap_level) {
                    self.asm.inc(c);
                }
            }
        }
    }

    /// Two-pass zero test of `tested` (with complement `comp`): completes
    /// exactly when `tested = 0`, restoring both counters and the level-`k`
    /// yardstick pair. Each pass transfers the current complement into `s_k`
    /// and calls `Dec_k`, which can finish only on a total transfer.
    fn emit_double_zt(
        &mut self,
        k: usize,
        tested: CounterId,
        comp: CounterId,
        pair_gid: usize,
        scope: &str,
    ) {
        self.emit_zt_pass(k, tested, comp, pair_gid, &format!("{scope}/pass1"));
        self.emit_zt_pass(k, comp, tested, pair_gid, &format!("{scope}/pass2"));
    }

    fn emit_zt_pass(
        &mut self,
        k: usize,
        tested: CounterId,
        comp: CounterId,
        pair_gid: usize,
        scope: &str,
    ) {
        let s = self.level(k).s;
        self.asm.gadget = format!("{scope}/transfer");
        let loop_l = self.asm.bind_fresh("zt_loop");
        let body_l = self.asm.fresh_label("zt_body");
        let done_l = self.asm.fresh_label("zt_done");
        self.asm
            .goto_choice(&body_l, &done_l, ChoicePredicate::Nonzero(comp), false);
        self.asm.bind(&body_l);
        self.asm.dec(comp);
        self.asm.inc(tested);
        self.asm.suspends_pair(pair_gid);
        self.asm.dec(s.neg);
        self.asm.inc(s.pos);
        self.asm.suspends_pair(s.gid);
        self.asm.goto(&loop_l);
        self.asm.bind(&done_l);
        self.asm.gadget = format!("{scope}/call");
        self.call_dec(k);
    }

    /// Emits a call to `Dec_k`: push a fresh return symbol, jump to the body;
    /// the body's dispatch pops the symbol and jumps back here.
    fn call_dec(&mut self, k: usize) {
        let site_no = self.level(k).sites.len();
        let sym = self.new_symbol(
            &format!("r{k}_{site_no}"),
            SymbolRole::Return {
                level: k,
                owner: self.asm.region,
            },
        );
        let entry = self.level(k).entry.clone();
        let ret = self.asm.fresh_label(&format!("ret{k}_{site_no}"));
        let owner = self.asm.region;
        self.asm.push(sym);
        self.asm.goto(&entry);
        self.asm.bind(&ret);
        self.levels[k - 1].sites.push(Site { sym, ret, owner });
    }

    /// Return dispatch of `Dec_k`: a chain of top-of-stack tests over the
    /// registered return symbols. A body without call sites gets an
    /// unreachable self-loop so the program stays well formed.
    fn emit_dispatch(&mut self, k: usize) {
        self.asm.gadget = format!("Dec_{k}/dispatch");
        let sites = std::mem::take(&mut self.levels[k - 1].sites);
        let n = sites.len();
        if n == 0 {
            let stub = self.asm.bind_fresh("disp_stub");
            self.asm.goto(&stub);
        } else if n == 1 {
            self.asm.pop(sites[0].sym);
            self.asm.goto(&sites[0].ret.clone());
            self.asm.resumes(sites[0].owner);
        } else {
            let leaf_labels: Vec<String> = (0..n)
                .map(|i| self.asm.fresh_label(&format!("disp{k}_leaf{i}")))
                .collect();
            let chain_labels: Vec<String> = (0..n - 1)
                .map(|i| self.asm.fresh_label(&format!("disp{k}_try{i}")))
                .collect();
            for i in 0..n - 1 {
                self.asm.bind(&chain_labels[i]);
                let next = if i + 1 < n - 1 {
                    chain_labels[i + 1].clone()
                } else {
                    leaf_labels[n - 1].clone()
                };
                self.asm.goto_choice(
                    &leaf_labels[i],
                    &next,
                    ChoicePredicate::Top(sites[i].sym),
                    false,
                );
            }
            for (i, site) in sites.iter().enumerate() {
                self.asm.bind(&leaf_labels[i]);
                self.asm.pop(site.sym);
                self.asm.goto(&site.ret.clone());
                self.asm.resumes(site.owner);
            }
        }
        self.levels[k - 1].sites = sites;
    }

    fn emit_epilogue(&mut self) {
        self.asm.region = Region::Drain;
        self.asm.gadget = "drain".to_string();
        let epilogue = self.epilogue.clone();
        self.asm.bind(&epilogue);
        for c in (0..self.asm.counter_count()).map(CounterId) {
            let loop_l = self.asm.bind_fresh("drain_loop");
            let body_l = self.asm.fresh_label("drain_body");
            let next_l = self.asm.fresh_label("drain_next");
            self.asm
                .goto_choice(&body_l, &next_l, ChoicePredicate::Nonzero(c), false);
            self.asm.bind(&body_l);
            self.asm.dec(c);
            self.asm.goto(&loop_l);
            self.asm.bind(&next_l);
        }
        self.asm.gadget = "halt".to_string();
        self.asm.halt();
    }

    fn finish(self) -> CompiledUnit {
        let top = self.top;
        let levels: Vec<LevelEntry> = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| LevelEntry {
                level: i + 1,
                zero_digit: l.d0,
                one_digit: l.d1,
                dec_entry: l.dec_entry_idx,
                dec_body_span: l.body_span,
                dec_s_commands: l.dec_s_cmds.clone(),
                return_symbols: l.sites.iter().map(|s| s.sym).collect(),
                init_span: l.init_span,
            })
            .collect();
        let levelmap = LevelMap {
            top,
            pairs: self.pairs,
            levels,
            source_pairs: self.source_pair_gids,
            symbol_roles: self.symbol_roles,
        };
        let (program, annotations, sourcemap) = self.asm.assemble();
        let violations = program.validate();
        assert!(violations.is_empty(), "emitted program invalid: {violations:?}");
        annotations
            .validate(&program)
            .expect("emitted annotations incomplete");
        CompiledUnit {
            program,
            annotations,
            sourcemap,
            levelmap,
        }
    }
}
