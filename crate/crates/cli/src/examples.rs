//! The three benchmark products, written as expressions.

pub const DEFAULT_POWER: u32 = 8;

pub struct Example {
    vars: &'static [&'static str],
    f: &'static str,
    g: &'static str,
    g_plus_one: bool,
    pub full_power: u32,
}

const EXAMPLES: [Example; 3] = [
    Example {
        vars: &["x", "y", "z", "t"],
        f: "1+x+y+z+t",
        g: "1+x+y+z+t",
        g_plus_one: true,
        full_power: 40,
    },
    Example {
        vars: &["x", "y", "z", "t", "u"],
        f: "1+x+y+2*z^2+3*t^3+5*u^5",
        g: "1+u+t+2*z^2+3*y^3+5*x^5",
        g_plus_one: false,
        full_power: 25,
    },
    Example {
        vars: &["u", "v", "w", "x", "y"],
        f: "1+u^2+v+w^2+x-y^2",
        g: "1+u+v^2+w+x^2+y^3",
        g_plus_one: true,
        full_power: 28,
    },
];

impl Example {
    /// `id` in 1..=3.
    pub fn get(id: u8) -> &'static Example {
        &EXAMPLES[id as usize - 1]
    }

    pub fn vars(&self) -> Vec<&'static str> {
        self.vars.to_vec()
    }

    pub fn f(&self, p: u32) -> String {
        format!("({})^{p}", self.f)
    }

    pub fn g(&self, p: u32) -> String {
        if self.g_plus_one {
            format!("({})^{p}+1", self.g)
        } else {
            format!("({})^{p}", self.g)
        }
    }
}

pub fn power(id: u8, scale: Option<u32>, full: bool) -> u32 {
    if full {
        Example::get(id).full_power
    } else {
        scale.unwrap_or(DEFAULT_POWER)
    }
}
