"""Core module for exact linear algebra, forms, embeddings and block scenarios."""
