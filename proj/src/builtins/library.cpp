// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/builtins/builtins.hpp"

namespace tessera::builtins {

const std::string& library_source() {
    static const std::string source = R"dml(
# Closed-form ridge regression over the normal equations.
lmDS = function(Matrix[Double] X, Matrix[Double] y, Double lambda = 0)
  return (Matrix[Double] beta)
{
  A = t(X) %*% X + diag(matrix(lambda, ncol(X), 1))
  b = t(X) %*% y
  beta = solve(A, b)
}

lm = function(Matrix[Double] X, Matrix[Double] y, Double lambda = 0)
  return (Matrix[Double] beta)
{
  beta = lmDS(X, y, lambda)
}

# Forward selection by AIC. Column indexes are 1-based; `selected` is
# zero-padded to ncol(X) and `path` holds the AIC after each accepted step,
# starting with the empty model. Residuals below rounding level relative to
# y'y count as an exact fit.
steplm = function(Matrix[Double] X, Matrix[Double] y, Double lambda = 0)
  return (Matrix[Double] selected, Matrix[Double] beta, Double rss, Double score, Integer nsel, Matrix[Double] path)
{
  m = nrow(X)
  n = ncol(X)
  rss = sum(y ^ 2)
  tiny = 1e-20 * rss
  score = aic(rss, m, 0)
  selected = matrix(0, 1, n)
  used = matrix(0, 1, n)
  path = matrix(0, 1, n + 1)
  path[1, 1] = score
  beta = matrix(0, 1, 1)
  nsel = 0
  continue = TRUE
  while (continue) {
    bestj = 0
    for (j in 1:n) {
      if (as.scalar(used[1, j]) == 0) {
        if (nsel == 0) {
          Xc = X[, j]
        } else {
          Xc = cbind(Xs, X[, j])
        }
        b = lmDS(Xc, y, lambda)
        r = y - Xc %*% b
        rj = max(sum(r ^ 2), tiny)
        a = aic(rj, m, nsel + 1)
        if (a < score) {
          score = a
          bestj = j
          bestb = b
          bestrss = rj
        }
      }
    }
    if (bestj == 0) {
      continue = FALSE
    } else {
      if (nsel == 0) {
        Xs = X[, bestj]
      } else {
        Xs = cbind(Xs, X[, bestj])
      }
      nsel = nsel + 1
      selected[1, nsel] = bestj
      used[1, bestj] = 1
      path[1, nsel + 1] = score
      beta = bestb
      rss = bestrss
      if (nsel == n) {
        continue = FALSE
      }
    }
  }
}

# k-fold cross-validation over contiguous folds. Column i of B is the model
# trained without fold i; rss[1, i] is its residual sum of squares on fold i.
# A seed >= 0 shuffles the rows before splitting.
cvlm = function(Matrix[Double] X, Matrix[Double] y, Integer k, Double lambda = 0, Integer seed = -1)
  return (Matrix[Double] B, Matrix[Double] rss)
{
  m = nrow(X)
  if (k < 2 | k > m) {
    stop("cvlm: k must lie in 2..nrow(X)")
  }
  if (seed >= 0) {
    P = permutation(m, seed)
    X = P %*% X
    y = P %*% y
  }
  foldsX = list()
  foldsY = list()
  for (i in 1:k) {
    lo = ((i - 1) * m) %/% k + 1
    hi = (i * m) %/% k
    foldsX = append(foldsX, X[lo:hi, ])
    foldsY = append(foldsY, y[lo:hi, ])
  }
  B = matrix(0, ncol(X), k)
  rss = matrix(0, 1, k)
  for (i in 1:k) {
    Xi = rbind(remove(foldsX, i))
    yi = rbind(remove(foldsY, i))
    beta = lmDS(Xi, yi, lambda)
    B[, i] = beta
    r = foldsY[i] - foldsX[i] %*% beta
    rss[1, i] = sum(r ^ 2)
  }
}

# One ridge model per regularization value.
gridSearchLM = function(Matrix[Double] X, Matrix[Double] y, List[Unknown] lambdas)
  return (Matrix[Double] B)
{
  k = length(lambdas)
  B = matrix(0, ncol(X), k)
  for (j in 1:k) {
    lambda = as.scalar(lambdas[j])
    beta = lmDS(X, y, lambda)
    B[, j] = beta
  }
}
)dml";
    return source;
}

} // namespace tessera::builtins
