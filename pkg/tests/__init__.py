# Test package for modchip
