use std::collections::HashMap;

/// Monomial bookkeeping shared by every jet over the same variables and
/// maximum order.
///
/// Monomials are stored in graded order (all degree-0, then degree-1, ...)
/// so a jet truncated at order `k` is a prefix of the full coefficient
/// vector.
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    max_order: usize,
    exponents: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `len_upto[k]` = number of monomials of degree <= k.
    len_upto: Vec<usize>,
    /// Product table `(a, b, c)` with `x^a * x^b = x^c`, sorted by `deg(c)`.
    products: Vec<(u32, u32, u32)>,
    products_upto: Vec<usize>,
    /// Per variable: `(src, dst, factor)` with `d/dx_v x^src = factor * x^dst`,
    /// sorted by `deg(dst)`.
    derivs: Vec<Vec<(u32, u32, f64)>>,
    derivs_upto: Vec<Vec<usize>>,
}

impl JetSpace {
    pub fn new(nvars: usize, max_order: usize) -> Self {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut len_upto = Vec::with_capacity(max_order + 1);
        for deg in 0..=max_order {
            let mut cur = vec![0u8; nvars];
            push_degree(&mut exponents, &mut cur, 0, deg);
            len_upto.push(exponents.len());
        }
        let lookup: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let degree = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();

        let mut products = Vec::new();
        for (a, ea) in exponents.iter().enumerate() {
            for (b, eb) in exponents.iter().enumerate() {
                if degree(ea) + degree(eb) > max_order {
                    continue;
                }
                let ec: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                products.push((a as u32, b as u32, lookup[&ec] as u32));
            }
        }
        products.sort_by_key(|&(_, _, c)| c);
        let products_upto = (0..=max_order)
            .map(|k| products.partition_point(|&(_, _, c)| (c as usize) < len_upto[k]))
            .collect();

        let mut derivs = Vec::with_capacity(nvars);
        let mut derivs_upto = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut table = Vec::new();
            for (dst, ed) in exponents.iter().enumerate() {
                if degree(ed) + 1 > max_order {
                    continue;
                }
                let mut es = ed.clone();
                es[v] += 1;
                table.push((lookup[&es] as u32, dst as u32, es[v] as f64));
            }
            table.sort_by_key(|&(_, d, _)| d);
            let upto = (0..=max_order)
                .map(|k| table.partition_point(|&(_, d, _)| (d as usize) < len_upto[k]))
                .collect();
            derivs.push(table);
            derivs_upto.push(upto);
        }

        Self {
            nvars,
            max_order,
            exponents,
            lookup,
            len_upto,
            products,
            products_upto,
            derivs,
            derivs_upto,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of coefficients of a jet truncated at `order`.
    pub fn len(&self, order: usize) -> usize {
        self.len_upto[order]
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponent(&self, idx: usize) -> &[u8] {
        &self.exponents[idx]
    }

    pub fn index_of(&self, exponent: &[u8]) -> Option<usize> {
        self.lookup.get(exponent).copied()
    }

    pub(crate) fn products(&self, order: usize) -> &[(u32, u32, u32)] {
        &self.products[..self.products_upto[order]]
    }

    pub(crate) fn derivative_table(&self, var: usize, order: usize) -> &[(u32, u32, f64)] {
        &self.derivs[var][..self.derivs_upto[var][order]]
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k as u8;
        push_degree(out, cur, pos + 1, remaining - k);
    }
    cur[pos] = 0;
}
