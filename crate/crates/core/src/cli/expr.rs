//! Scalar expressions over x, y, s and t.

use meval::tokenizer::Token;
use meval::{ContextProvider, Expr, FuncEvalError};

const VARIABLES: [&str; 4] = ["x", "y", "s", "t"];
const FUNCTIONS: [&str; 21] = [
    "sin", "cos", "tan", "asin", "acos", "atan", "atan2", "sinh", "cosh", "tanh", "exp", "ln", "log10", "sqrt",
    "abs", "floor", "ceil", "signum", "min", "max", "hypot",
];

/// A parsed expression, checked to use only the known variables and functions.
#[derive(Debug, Clone)]
pub struct Expression {
    expr: Expr,
    time_dependent: bool,
}

struct Point {
    x: f64,
    y: f64,
    s: f64,
    t: f64,
}

impl ContextProvider for Point {
    fn get_var(&self, name: &str) -> Option<f64> {
        match name {
            "x" => Some(self.x),
            "y" => Some(self.y),
            "s" => Some(self.s),
            "t" => Some(self.t),
            "pi" => Some(std::f64::consts::PI),
            "e" => Some(std::f64::consts::E),
            _ => None,
        }
    }

    fn eval_func(&self, name: &str, args: &[f64]) -> Result<f64, FuncEvalError> {
        let one = |f: fn(f64) -> f64| match args {
            [a] => Ok(f(*a)),
            _ => Err(FuncEvalError::NumberArgs(1)),
        };
        let two = |f: fn(f64, f64) -> f64| match args {
            [a, b] => Ok(f(*a, *b)),
            _ => Err(FuncEvalError::NumberArgs(2)),
        };
        match name {
            "sin" => one(f64::sin),
            "cos" => one(f64::cos),
            "tan" => one(f64::tan),
            "asin" => one(f64::asin),
            "acos" => one(f64::acos),
            "atan" => one(f64::atan),
            "atan2" => two(f64::atan2),
            "sinh" => one(f64::sinh),
            "cosh" => one(f64::cosh),
            "tanh" => one(f64::tanh),
            "exp" => one(f64::exp),
            "ln" => one(f64::ln),
            "log10" => one(f64::log10),
            "sqrt" => one(f64::sqrt),
            "abs" => one(f64::abs),
            "floor" => one(f64::floor),
            "ceil" => one(f64::ceil),
            "signum" => one(f64::signum),
            "min" => two(f64::min),
            "max" => two(f64::max),
            "hypot" => two(f64::hypot),
            _ => Err(FuncEvalError::UnknownFunction),
        }
    }
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self, String> {
        let expr: Expr = text.parse().map_err(|e: meval::Error| e.to_string())?;
        let mut time_dependent = false;
        for token in expr.iter() {
            match token {
                Token::Var(v) => {
                    if v == "t" {
                        time_dependent = true;
                    } else if !VARIABLES.contains(&v.as_str()) && v != "pi" && v != "e" {
                        return Err(format!("undefined variable `{v}` (allowed: x, y, s, t, pi, e)"));
                    }
                }
                Token::Func(f, _) if !FUNCTIONS.contains(&f.as_str()) => {
                    return Err(format!("unknown function `{f}`"));
                }
                _ => {}
            }
        }
        let e = Expression { expr, time_dependent };
        e.try_eval(0.0, 0.0, 0.0, 0.0)?;
        Ok(e)
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    fn try_eval(&self, x: f64, y: f64, s: f64, t: f64) -> Result<f64, String> {
        self.expr.eval_with_context(Point { x, y, s, t }).map_err(|e| e.to_string())
    }

    /// Value at a point; arity errors were ruled out at parse time.
    pub fn eval(&self, x: f64, y: f64, s: f64, t: f64) -> f64 {
        self.try_eval(x, y, s, t).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_and_rejects() {
        let e = Expression::parse("2 + x*sin(pi*y) + t^2").unwrap();
        assert!(e.is_time_dependent());
        assert!((e.eval(1.0, 0.5, 0.0, 2.0) - 7.0).abs() < 1e-14);
        assert!(Expression::parse("z + 1").unwrap_err().contains("undefined variable"));
        assert!(Expression::parse("foo(x)").unwrap_err().contains("unknown function"));
        assert!(Expression::parse("max(x)").is_err());
        assert!(Expression::parse("1 +").is_err());
        assert!(!Expression::parse("hypot(x, y)").unwrap().is_time_dependent());
    }
}
