"""Binary Quadratic Quantization toolkit with baseline matrix quantizers."""
