"""Grid chain complexes, GF(2) linear algebra and bigraded homology."""
