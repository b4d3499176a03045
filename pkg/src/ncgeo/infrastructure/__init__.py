# Substrate layer: exact linear algebra, algebras, derivations, modules
