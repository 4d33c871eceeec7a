//! Elaboration of a checked program into a runnable behavior.
//!
//! The builder mirrors the checker's call-by-name discipline: definition
//! parameters are bound to caller expressions, and `<-`-bound variables
//! acquire their values inside `bind` continuations, where the body is
//! elaborated against the extended environment. Everything that can be
//! rejected is rejected by `check_program` first; the builder treats a
//! type mismatch as an internal invariant violation.

use std::rc::Rc;

use crate::behavior::Behavior;
use crate::combinators::{
    attempt, bind, both, fallback, fallback_over, monitor, parallel, r_select, then,
};

use super::ast::{Expr, ExprKind, Literal, Program, Val};
use super::library::Library;

#[derive(Clone)]
enum RBinding {
    Value(Val),
    Syntactic(Rc<Expr>, REnv),
}

#[derive(Clone, Default)]
struct REnv(Option<Rc<(String, RBinding, REnv)>>);

impl REnv {
    fn lookup(&self, name: &str) -> Option<&RBinding> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.0 == name {
                return Some(&node.1);
            }
            cur = &node.2;
        }
        None
    }

    fn with(&self, name: &str, binding: RBinding) -> REnv {
        REnv(Some(Rc::new((name.to_string(), binding, self.clone()))))
    }
}

/// Build the behavior denoted by a definition of a checked program.
pub fn build_program(program: Rc<Program>, lib: Rc<Library>, entry: &str) -> Behavior<Val> {
    let builder = Builder { program, lib };
    let def = builder
        .program
        .def(entry)
        .unwrap_or_else(|| panic!("entry `{entry}` vanished after checking"))
        .clone();
    builder.build(&def.body, &REnv::default())
}

#[derive(Clone)]
struct Builder {
    program: Rc<Program>,
    lib: Rc<Library>,
}

impl Builder {
    fn build(&self, e: &Expr, env: &REnv) -> Behavior<Val> {
        match &e.kind {
            ExprKind::Var(name) => self.build_name(name, env),
            ExprKind::Call { name, args } => self.build_call(name, args, env),
            ExprKind::Seq(a, b) => then(self.build(a, env), self.build(b, env)),
            ExprKind::Bind { var, value, body } => {
                let value = self.build(value, env);
                let builder = self.clone();
                let var = var.clone();
                let body = Rc::new((**body).clone());
                let env = env.clone();
                bind(value, move |v| {
                    builder.build(&body, &env.with(&var, RBinding::Value(v)))
                })
            }
            ExprKind::Fallback(a, b) => fallback(self.build(a, env), self.build(b, env)),
            ExprKind::Parallel(a, b) => {
                parallel(self.build(a, env), self.build(b, env)).map(|_| Val::Null)
            }
            ExprKind::Both(a, b) => {
                both(self.build(a, env), self.build(b, env)).map(|_| Val::Null)
            }
            ExprKind::RSelect { test, left, right } => {
                let test = self.build(test, env).map(|v| v.as_bool());
                r_select(test, self.build(left, env), self.build(right, env))
            }
            ExprKind::Monitor {
                test,
                recovery,
                task,
            } => {
                let test = self.build(test, env).map(|v| v.as_bool());
                let recovery = self.build(recovery, env).map(|_| ());
                monitor(test, recovery, self.build(task, env))
            }
            ExprKind::Attempt { n, body } => attempt(*n, self.build(body, env)),
            ExprKind::FallbackOver { list, func } => {
                let list = self.build(list, env);
                let apply = self.applier(func);
                bind(list, move |lv| {
                    fallback_over(lv.as_list().to_vec(), |item| apply(item))
                })
            }
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let cond = self.build(cond, env);
                let then_b = self.build(then_branch, env);
                let else_b = self.build(else_branch, env);
                bind(cond, move |cv| {
                    if cv.as_bool() {
                        then_b.clone()
                    } else {
                        else_b.clone()
                    }
                })
            }
            ExprKind::Pure(lit) => Behavior::pure(match lit {
                Literal::Unit => Val::Null,
                Literal::Bool(b) => Val::Bool(*b),
                Literal::Int(n) => Val::Int(*n),
            }),
            ExprKind::Cmp { op, constant, arg } => {
                let (op, constant) = (*op, *constant);
                self.build(arg, env)
                    .map(move |v| Val::Bool(op.apply(v.as_int(), constant)))
            }
            ExprKind::Value(v) => Behavior::pure(v.clone()),
        }
    }

    fn build_name(&self, name: &str, env: &REnv) -> Behavior<Val> {
        if let Some(binding) = env.lookup(name) {
            return match binding {
                RBinding::Value(v) => Behavior::pure(v.clone()),
                RBinding::Syntactic(expr, captured) => {
                    let (expr, captured) = (expr.clone(), captured.clone());
                    self.build(&expr, &captured)
                }
            };
        }
        if let Some(def) = self.program.def(name) {
            return self.build(&def.body.clone(), &REnv::default());
        }
        if let Some(entry) = self.lib.actions.get(name) {
            return (entry.build)(&[]);
        }
        if let Some(v) = self.lib.constants.get(name) {
            return Behavior::pure(v.clone());
        }
        panic!("unbound name `{name}` after checking");
    }

    fn build_call(&self, name: &str, args: &[Expr], env: &REnv) -> Behavior<Val> {
        if let Some(def) = self.program.def(name) {
            let mut inner = REnv::default();
            for (param, arg) in def.params.iter().zip(args) {
                inner = inner.with(
                    param,
                    RBinding::Syntactic(Rc::new(arg.clone()), env.clone()),
                );
            }
            return self.build(&def.body.clone(), &inner);
        }
        if let Some(entry) = self.lib.actions.get(name) {
            let vals: Vec<Val> = args.iter().map(|a| self.eval_value(a, env)).collect();
            return (entry.build)(&vals);
        }
        panic!("unbound name `{name}` after checking");
    }

    fn eval_value(&self, e: &Expr, env: &REnv) -> Val {
        match &e.kind {
            ExprKind::Var(name) => {
                if let Some(binding) = env.lookup(name) {
                    return match binding {
                        RBinding::Value(v) => v.clone(),
                        RBinding::Syntactic(expr, captured) => {
                            let (expr, captured) = (expr.clone(), captured.clone());
                            self.eval_value(&expr, &captured)
                        }
                    };
                }
                if let Some(v) = self.lib.constants.get(name) {
                    return v.clone();
                }
                panic!("`{name}` is not a value after checking");
            }
            ExprKind::Value(v) => v.clone(),
            other => panic!("non-value action argument after checking: {other:?}"),
        }
    }

    /// A one-argument application closure for `fallbackOver`.
    /// Definitions are top-level, so nothing from the call site leaks in.
    fn applier(&self, func: &str) -> Rc<dyn Fn(Val) -> Behavior<Val>> {
        if let Some(def) = self.program.def(func) {
            let builder = self.clone();
            let body = Rc::new(def.body.clone());
            let param = def.params[0].clone();
            return Rc::new(move |v| {
                builder.build(&body, &REnv::default().with(&param, RBinding::Value(v)))
            });
        }
        if let Some(entry) = self.lib.actions.get(func) {
            let build = entry.build.clone();
            return Rc::new(move |v| build(&[v]));
        }
        panic!("unbound name `{func}` after checking");
    }
}
