"""Semantic-hashing retrieval: a denoising autoencoder maps TF-IDF vectors to
short binary codes; queries preselect candidates inside a hamming ball and
rank them by cosine, optionally with GSA/PRF query augmentation."""

from semhash.hashindex import HAVE_COMPILED_KERNEL

__version__ = "0.1.0"

__all__ = ["HAVE_COMPILED_KERNEL", "__version__"]
