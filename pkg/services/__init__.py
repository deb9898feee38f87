# Services package
