# -*- coding: utf-8 -*-
"""
NHVC SIM テストパッケージ

- unit: 代数・サービス・スキーマ単位のテスト
- integration: 長時間積分と CLI の統合テスト
"""
