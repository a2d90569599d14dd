# -*- coding: utf-8 -*-
"""
NHVC SIM Core Package
"""
