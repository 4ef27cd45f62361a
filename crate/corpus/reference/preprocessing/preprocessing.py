"""Feature scaling and encoding transformers with a fit/transform API."""
import warnings

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted


def _handle_zeros_in_scale(scale, copy=True):
    if np.isscalar(scale):
        return 1.0 if scale == 0.0 else scale
    if copy:
        scale = scale.copy()
    scale[scale == 0.0] = 1.0
    return scale


class RobustScaler(BaseEstimator, TransformerMixin):
    def __init__(self, with_centering=True, with_scaling=True, quantile_range=(25.0, 75.0), copy=True):
        self.with_centering = with_centering
        self.with_scaling = with_scaling
        self.quantile_range = quantile_range
        self.copy = copy

    def fit(self, X, y=None):
        X = check_array(X, accept_sparse='csc', dtype=np.float64, force_all_finite='allow-nan')
        q_min, q_max = self.quantile_range
        if not 0 <= q_min <= q_max <= 100:
            raise ValueError('Invalid quantile range: %s' % str(self.quantile_range))
        if self.with_centering:
            if sparse.issparse(X):
                raise ValueError('Cannot center sparse matrices: use with_centering=False')
            self.center_ = np.nanmedian(X, axis=0)
        else:
            self.center_ = None
        if self.with_scaling:
            quantiles = []
            for feature_idx in range(X.shape[1]):
                if sparse.issparse(X):
                    column = X[:, feature_idx].toarray().ravel()
                else:
                    column = X[:, feature_idx]
                quantiles.append(np.nanpercentile(column, self.quantile_range))
            quantiles = np.transpose(quantiles)
            self.scale_ = quantiles[1] - quantiles[0]
            self.scale_ = _handle_zeros_in_scale(self.scale_, copy=False)
        else:
            self.scale_ = None
        return self

    def transform(self, X):
        check_is_fitted(self, ['center_', 'scale_'])
        X = check_array(X, accept_sparse=('csr', 'csc'), copy=self.copy, dtype=np.float64, force_all_finite='allow-nan')
        if sparse.issparse(X):
            if self.with_scaling:
                X = X.multiply(1.0 / self.scale_).tocsr()
        else:
            if self.with_centering:
                X -= self.center_
            if self.with_scaling:
                X /= self.scale_
        return X

    def inverse_transform(self, X):
        check_is_fitted(self, ['center_', 'scale_'])
        X = check_array(X, copy=self.copy, dtype=np.float64, force_all_finite='allow-nan')
        if self.with_scaling:
            X *= self.scale_
        if self.with_centering:
            X += self.center_
        return X


class OrdinalEncoder(BaseEstimator, TransformerMixin):
    def __init__(self, categories='auto', handle_unknown='error', unknown_value=None):
        self.categories = categories
        self.handle_unknown = handle_unknown
        self.unknown_value = unknown_value

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=object)
        if X.ndim != 2:
            raise ValueError('Expected 2D array, got %dD' % X.ndim)
        if self.handle_unknown not in ('error', 'use_encoded_value'):
            raise ValueError('handle_unknown must be error or use_encoded_value')
        if self.handle_unknown == 'use_encoded_value' and self.unknown_value is None:
            raise TypeError('unknown_value must be set when handle_unknown is use_encoded_value')
        self.categories_ = []
        for i in range(X.shape[1]):
            if self.categories == 'auto':
                cats = sorted(set(X[:, i]), key=lambda v: (v is None, str(v)))
            else:
                cats = list(self.categories[i])
                missing = set(X[:, i]) - set(cats)
                if missing and self.handle_unknown == 'error':
                    raise ValueError('Found unknown categories %s in column %d during fit' % (sorted(missing), i))
            self.categories_.append(np.array(cats, dtype=object))
        return self

    def transform(self, X):
        check_is_fitted(self, 'categories_')
        X = np.asarray(X, dtype=object)
        out = np.zeros(X.shape, dtype=np.float64)
        for i, cats in enumerate(self.categories_):
            lookup = {c: j for j, c in enumerate(cats)}
            for row, value in enumerate(X[:, i]):
                code = lookup.get(value)
                if code is None:
                    if self.handle_unknown == 'error':
                        raise ValueError('Found unknown category %r in column %d' % (value, i))
                    code = self.unknown_value
                out[row, i] = code
        return out

    def inverse_transform(self, X):
        X = check_array(X, dtype=np.float64)
        result = np.empty(X.shape, dtype=object)
        for i, cats in enumerate(self.categories_):
            codes = X[:, i].astype(int)
            unknown = (codes < 0) | (codes >= len(cats))
            if unknown.any():
                warnings.warn('%d unknown codes in column %d' % (unknown.sum(), i))
            result[:, i] = [cats[c] if not u else None for c, u in zip(codes, unknown)]
        return result
