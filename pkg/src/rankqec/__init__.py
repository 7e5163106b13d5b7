"""Classical and quantum Gabidulin codes."""
